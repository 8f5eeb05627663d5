#include "cloze/knowledge/embeddings.hpp"

#include "cloze/corpus/story.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace cloze::knowledge {

namespace {

/// Line source over either a plain or a gzip file.
class LineReader
{
public:
  explicit LineReader(std::filesystem::path const &path)
    : path_(path)
  {
    if (path.extension() == ".gz") {
      gz_ = gzopen(path.string().c_str(), "rb");
      if (gz_ == nullptr) { throw corpus::DataError("cannot open " + path.string()); }
    } else {
      plain_.open(path);
      if (!plain_) { throw corpus::DataError("cannot open " + path.string()); }
    }
  }
  ~LineReader()
  {
    if (gz_ != nullptr) { gzclose(gz_); }
  }
  LineReader(LineReader const &) = delete;
  LineReader &operator=(LineReader const &) = delete;

  bool next(std::string &line)
  {
    line.clear();
    if (gz_ == nullptr) {
      if (!std::getline(plain_, line)) { return false; }
    } else {
      char buf[8192];
      bool any = false;
      while (gzgets(gz_, buf, sizeof(buf)) != nullptr) {
        any = true;
        line += buf;
        if (!line.empty() && line.back() == '\n') { break; }
      }
      if (!any) { return false; }
      if (!line.empty() && line.back() == '\n') { line.pop_back(); }
    }
    if (!line.empty() && line.back() == '\r') { line.pop_back(); }
    return true;
  }

private:
  std::filesystem::path path_;
  std::ifstream plain_;
  gzFile gz_ = nullptr;
};

std::string strip_concept_prefix(std::string word)
{
  if (word.starts_with("/c/")) {
    auto const slash = word.find('/', 3);
    if (slash != std::string::npos) { word = word.substr(slash + 1); }
    auto const tail = word.find('/');
    if (tail != std::string::npos) { word.resize(tail); }
  }
  return word;
}

} // namespace

EmbeddingTable::EmbeddingTable(int dimension)
  : dimension_(dimension)
{
  if (dimension < 1) { throw corpus::DataError("embedding dimension must be positive"); }
}

void EmbeddingTable::add(std::string word, ad::RowVector const &vector)
{
  if (vector.size() != dimension_) {
    throw corpus::DataError("embedding for '" + word + "' has " + std::to_string(vector.size()) +
                            " components, table dimension is " + std::to_string(dimension_));
  }
  auto [it, fresh] = index_.emplace(std::move(word), vectors_.size());
  if (fresh) {
    vectors_.push_back(vector);
    norms_.push_back(vector.norm());
  } else {
    vectors_[it->second] = vector;
    norms_[it->second] = vector.norm();
  }
}

std::optional<ad::RowVector> EmbeddingTable::find(std::string const &word) const
{
  auto it = index_.find(word);
  if (it == index_.end()) { return std::nullopt; }
  return vectors_[it->second];
}

double EmbeddingTable::similarity(std::string const &a, std::string const &b) const
{
  auto ia = index_.find(a);
  auto ib = index_.find(b);
  if (ia == index_.end() || ib == index_.end()) { return 0.0; }
  double const na = norms_[ia->second];
  double const nb = norms_[ib->second];
  if (na == 0.0 || nb == 0.0) { return 0.0; }
  return vectors_[ia->second].dot(vectors_[ib->second]) / (na * nb);
}

EmbeddingTable load_embeddings(std::filesystem::path const &path, std::unordered_set<std::string> const *filter)
{
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) { throw corpus::DataError(path.string() + ": empty embedding file"); }
  long long count = 0;
  int dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> count >> dim) || count < 0 || dim < 1) {
      throw corpus::DataError(path.string() + ":1: expected header 'count dimension'");
    }
  }
  EmbeddingTable table(dim);
  std::size_t number = 1;
  ad::RowVector v(dim);
  while (reader.next(line)) {
    ++number;
    if (line.empty()) { continue; }
    auto const space = line.find(' ');
    std::string word = strip_concept_prefix(line.substr(0, space));
    if (filter != nullptr && !filter->contains(word)) { continue; }
    int got = 0;
    char const *p = space == std::string::npos ? line.data() + line.size() : line.data() + space;
    char const *const end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') { ++p; }
      if (p == end) { break; }
      double x = 0.0;
      auto const [next, ec] = std::from_chars(p, end, x);
      if (ec != std::errc{}) {
        throw corpus::DataError(path.string() + ":" + std::to_string(number) + ": malformed number");
      }
      if (got < dim) { v(got) = x; }
      ++got;
      p = next;
    }
    if (got != dim) {
      throw corpus::DataError(path.string() + ":" + std::to_string(number) + ": expected " + std::to_string(dim) +
                              " components, got " + std::to_string(got));
    }
    table.add(std::move(word), v);
  }
  return table;
}

void write_embeddings(std::filesystem::path const &path, std::vector<std::pair<std::string, ad::RowVector>> const &rows)
{
  if (rows.empty()) { throw corpus::DataError("write_embeddings: no rows"); }
  auto const dim = rows.front().second.size();
  std::ofstream out(path, std::ios::trunc);
  if (!out) { throw corpus::DataError("cannot write " + path.string()); }
  out << rows.size() << ' ' << dim << '\n';
  char buf[32];
  for (auto const &[word, vec] : rows) {
    out << word;
    for (ad::Index i = 0; i < vec.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.6f", vec(i));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

} // namespace cloze::knowledge
