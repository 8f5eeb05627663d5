#pragma once

#include "cloze/autodiff/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cloze::ad {

using NamedParameters = std::vector<std::pair<std::string, Tensor>>;

inline constexpr Scalar kInitStddev = 0.02;

/// Trainable weight matrix drawn from normal(0, stddev).
Tensor normal_parameter(Index rows, Index cols, std::mt19937_64 &rng, Scalar stddev = kInitStddev);
/// Trainable zero-initialized tensor (biases).
Tensor zero_parameter(Index rows, Index cols);
/// Trainable tensor filled with `value` (layer-norm gains).
Tensor constant_parameter(Index rows, Index cols, Scalar value);

std::vector<Tensor> tensors_of(NamedParameters const &named);

/// Independent generator for a named purpose ("init", "shuffle", ...) derived
/// from one run seed.
std::mt19937_64 substream(std::uint64_t seed, std::string_view name);

} // namespace cloze::ad
