#include "cloze/corpus/story.hpp"

#include "cloze/corpus/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace cloze::corpus {

namespace {

std::string read_file(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw DataError("cannot open " + path.string()); }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string where(std::filesystem::path const &path, std::size_t row, std::size_t line)
{
  return path.string() + ": row " + std::to_string(row) + " (line " + std::to_string(line) + ")";
}

std::vector<csv::Row> rows_with_header(std::filesystem::path const &path, std::size_t min_columns)
{
  auto rows = csv::parse(read_file(path));
  if (rows.empty()) { throw DataError(path.string() + ": empty file, expected a header row"); }
  if (rows.front().fields.size() < min_columns) {
    throw DataError(path.string() + ": header has " + std::to_string(rows.front().fields.size()) +
                    " columns, expected at least " + std::to_string(min_columns));
  }
  return rows;
}

void write_file_atomic(std::filesystem::path const &path, std::string const &text)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) { throw DataError("cannot write " + tmp.string()); }
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

} // namespace

void Story::validate() const
{
  if (endings.size() != 1 && endings.size() != 2) {
    throw DataError("story " + id + ": expected 1 or 2 endings, got " + std::to_string(endings.size()));
  }
  if (label.has_value() != (endings.size() == 2)) {
    throw DataError("story " + id + ": a label is required exactly when there are two endings");
  }
  if (label && (*label < 0 || *label > 1)) { throw DataError("story " + id + ": label must be 0 or 1"); }
}

std::vector<Story> load_labeled(std::filesystem::path const &path)
{
  auto const rows = rows_with_header(path, 8);
  auto const &header = rows.front().fields;
  bool const has_kind = header.size() == 9 && lower(header[8]) == "kind";
  if (header.size() != 8 && !has_kind) {
    throw DataError(path.string() + ": header must have 8 columns (or 9 ending in 'kind'), got " +
                    std::to_string(header.size()));
  }
  std::vector<Story> stories;
  stories.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto const &f = rows[r].fields;
    if (f.size() != header.size()) {
      throw DataError(where(path, r, rows[r].line) + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(f.size()));
    }
    Story s;
    s.id = f[0];
    for (int i = 0; i < 4; ++i) { s.body[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i + 1)]; }
    s.endings = {f[5], f[6]};
    if (f[7] == "1") {
      s.label = 0;
    } else if (f[7] == "2") {
      s.label = 1;
    } else {
      throw DataError(where(path, r, rows[r].line) + ": answer must be 1 or 2, got '" + f[7] + "'");
    }
    if (has_kind) { s.kind = f[8]; }
    stories.push_back(std::move(s));
  }
  return stories;
}

std::vector<Story> load_unlabeled(std::filesystem::path const &path)
{
  auto const rows = rows_with_header(path, 6);
  std::vector<Story> stories;
  stories.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto const &f = rows[r].fields;
    if (f.size() != 6) {
      throw DataError(where(path, r, rows[r].line) + ": expected 6 fields, got " + std::to_string(f.size()));
    }
    Story s;
    s.id = f[0];
    for (int i = 0; i < 4; ++i) { s.body[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i + 1)]; }
    s.endings = {f[5]};
    stories.push_back(std::move(s));
  }
  return stories;
}

void write_labeled(std::filesystem::path const &path, std::vector<Story> const &stories)
{
  bool const with_kind = std::any_of(stories.begin(), stories.end(), [](Story const &s) { return !s.kind.empty(); });
  csv::Record header{"storyid", "sentence1", "sentence2", "sentence3", "sentence4", "ending1", "ending2", "answer"};
  if (with_kind) { header.push_back("kind"); }
  std::string text = csv::format_record(header) + "\n";
  for (auto const &s : stories) {
    s.validate();
    if (!s.labeled()) { throw DataError("write_labeled: story " + s.id + " has no label"); }
    csv::Record rec{s.id, s.body[0], s.body[1], s.body[2], s.body[3], s.endings[0], s.endings[1],
                    std::to_string(*s.label + 1)};
    if (with_kind) { rec.push_back(s.kind); }
    text += csv::format_record(rec) + "\n";
  }
  write_file_atomic(path, text);
}

void write_unlabeled(std::filesystem::path const &path, std::vector<Story> const &stories)
{
  std::string text =
    csv::format_record({"storyid", "sentence1", "sentence2", "sentence3", "sentence4", "sentence5"}) + "\n";
  for (auto const &s : stories) {
    if (s.endings.empty()) { throw DataError("write_unlabeled: story " + s.id + " has no ending"); }
    std::size_t const gold = s.label ? static_cast<std::size_t>(*s.label) : 0;
    text += csv::format_record({s.id, s.body[0], s.body[1], s.body[2], s.body[3], s.endings[gold]}) + "\n";
  }
  write_file_atomic(path, text);
}

Split split(std::vector<Story> const &stories, SplitSpec const &spec)
{
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw DataError("split: train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(stories.size());
  for (std::size_t i = 0; i < order.size(); ++i) { order[i] = i; }
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  auto const n_train = static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(stories.size())));
  Split out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.train : out.validation).push_back(stories[order[i]]);
  }
  return out;
}

} // namespace cloze::corpus
