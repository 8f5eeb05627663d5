#include "cloze/autodiff/parameters.hpp"

namespace cloze::ad {

Tensor normal_parameter(Index rows, Index cols, std::mt19937_64 &rng, Scalar stddev)
{
  std::normal_distribution<Scalar> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) { m.data()[i] = dist(rng); }
  return Tensor(std::move(m), true);
}

Tensor zero_parameter(Index rows, Index cols) { return Tensor(Matrix::Zero(rows, cols), true); }

Tensor constant_parameter(Index rows, Index cols, Scalar value)
{
  return Tensor(Matrix::Constant(rows, cols, value), true);
}

std::vector<Tensor> tensors_of(NamedParameters const &named)
{
  std::vector<Tensor> out;
  out.reserve(named.size());
  for (auto const &[name, t] : named) { out.push_back(t); }
  return out;
}

std::mt19937_64 substream(std::uint64_t seed, std::string_view name)
{
  // FNV-1a keeps the derivation stable across standard libraries.
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

} // namespace cloze::ad
