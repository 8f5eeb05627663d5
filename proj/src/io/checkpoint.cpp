#include "cloze/io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cloze::io {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'O', 'Z', 'E', 'C', 'K', 'P'};

class Writer
{
public:
  template <typename T>
  void integer(T v)
  {
    for (std::size_t i = 0; i < sizeof(T); ++i) { out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF)); }
  }
  void real(double v) { integer(std::bit_cast<std::uint64_t>(v)); }
  void string(std::string const &s)
  {
    integer(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void raw(char const *data, std::size_t n) { out_.append(data, n); }
  std::string const &bytes() const { return out_; }

private:
  std::string out_;
};

class Reader
{
public:
  Reader(std::string data, std::string source)
    : data_(std::move(data))
    , source_(std::move(source))
  {
  }

  template <typename T>
  T integer()
  {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }
  double real() { return std::bit_cast<double>(integer<std::uint64_t>()); }
  std::string string()
  {
    auto const n = integer<std::uint32_t>();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void raw(char *dst, std::size_t n)
  {
    need(n);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == data_.size(); }

private:
  void need(std::size_t n) const
  {
    if (data_.size() - pos_ < n) { throw CheckpointError(source_ + ": truncated checkpoint"); }
  }
  std::string data_;
  std::string source_;
  std::size_t pos_ = 0;
};

} // namespace

ad::Matrix const *Checkpoint::find(std::string const &name) const
{
  for (auto const &[n, m] : parameters) {
    if (n == name) { return &m; }
  }
  return nullptr;
}

std::string const &Checkpoint::meta(std::string const &key) const
{
  auto it = metadata.find(key);
  if (it == metadata.end()) { throw CheckpointError("checkpoint metadata lacks '" + key + "'"); }
  return it->second;
}

void write_checkpoint(std::filesystem::path const &path, Checkpoint const &checkpoint)
{
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.integer(kCheckpointVersion);
  w.integer(static_cast<std::uint64_t>(checkpoint.metadata.size()));
  for (auto const &[k, v] : checkpoint.metadata) {
    w.string(k);
    w.string(v);
  }
  w.integer(static_cast<std::uint64_t>(checkpoint.vocabulary.size()));
  for (auto const &t : checkpoint.vocabulary) { w.string(t); }
  w.integer(static_cast<std::uint64_t>(checkpoint.parameters.size()));
  for (auto const &[name, m] : checkpoint.parameters) {
    w.string(name);
    w.integer(std::uint32_t{2});
    w.integer(static_cast<std::uint64_t>(m.rows()));
    w.integer(static_cast<std::uint64_t>(m.cols()));
    for (ad::Index i = 0; i < m.size(); ++i) { w.real(m.data()[i]); }
  }

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) { throw CheckpointError("cannot write " + tmp.string()); }
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) { throw CheckpointError("write failed for " + tmp.string()); }
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw CheckpointError("cannot open checkpoint " + path.string()); }
  std::ostringstream ss;
  ss << in.rdbuf();
  Reader r(ss.str(), path.string());

  char magic[8];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) { throw CheckpointError(path.string() + ": not a checkpoint"); }
  auto const version = r.integer<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  auto const n_meta = r.integer<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_meta; ++i) {
    auto k = r.string();
    c.metadata[k] = r.string();
  }
  auto const n_tokens = r.integer<std::uint64_t>();
  c.vocabulary.reserve(n_tokens);
  for (std::uint64_t i = 0; i < n_tokens; ++i) { c.vocabulary.push_back(r.string()); }
  auto const n_params = r.integer<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_params; ++i) {
    auto name = r.string();
    if (r.integer<std::uint32_t>() != 2) { throw CheckpointError(path.string() + ": parameter " + name + " is not rank 2"); }
    auto const rows = static_cast<ad::Index>(r.integer<std::uint64_t>());
    auto const cols = static_cast<ad::Index>(r.integer<std::uint64_t>());
    ad::Matrix m(rows, cols);
    for (ad::Index j = 0; j < m.size(); ++j) { m.data()[j] = r.real(); }
    c.parameters.emplace_back(std::move(name), std::move(m));
  }
  if (!r.done()) { throw CheckpointError(path.string() + ": trailing bytes after parameters"); }
  return c;
}

void store_parameters(Checkpoint &checkpoint, ad::NamedParameters const &params)
{
  for (auto const &[name, t] : params) { checkpoint.parameters.emplace_back(name, t.value()); }
}

void load_parameters(Checkpoint const &checkpoint, ad::NamedParameters const &params)
{
  for (auto const &[name, t] : params) {
    auto const *m = checkpoint.find(name);
    if (m == nullptr) { throw CheckpointError("checkpoint lacks parameter '" + name + "'"); }
    if (m->rows() != t.rows() || m->cols() != t.cols()) {
      throw CheckpointError("parameter '" + name + "' has shape " + ad::to_string({m->rows(), m->cols()}) +
                            " in checkpoint, model expects " + ad::to_string(t.shape()));
    }
    ad::Tensor copy = t;
    copy.mutable_value() = *m;
  }
}

} // namespace cloze::io
