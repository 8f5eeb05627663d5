#pragma once

#include "cloze/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>

namespace cloze::ad {

/// Result of a cosine on plain vectors. `degenerate` is set when either input
/// has zero norm, in which case `value` is 0.
struct Cosine
{
  Scalar value = 0.0;
  bool degenerate = false;
};

template <typename DerivedA, typename DerivedB>
Cosine cosine_similarity(Eigen::MatrixBase<DerivedA> const &a, Eigen::MatrixBase<DerivedB> const &b)
{
  if (a.size() != b.size()) {
    throw ShapeError("cosine_similarity: lengths differ (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  Scalar const na = a.norm();
  Scalar const nb = b.norm();
  if (na == 0.0 || nb == 0.0) { return {0.0, true}; }
  Scalar const dot = a.reshaped().dot(b.reshaped());
  return {std::clamp(dot / (na * nb), Scalar(-1), Scalar(1)), false};
}

// Probabilities below this are clamped inside cross_entropy.
inline constexpr Scalar kProbabilityFloor = 1e-12;
inline constexpr Scalar kLayerNormEpsilon = 1e-5;

// Arithmetic. `b` may match `a`'s shape, be a 1 x cols row (broadcast over
// rows) or a 1 x 1 scalar (broadcast everywhere).
Tensor add(Tensor const &a, Tensor const &b);
Tensor sub(Tensor const &a, Tensor const &b);
Tensor hadamard(Tensor const &a, Tensor const &b);
Tensor scale(Tensor const &a, Scalar factor);
Tensor operator+(Tensor const &a, Tensor const &b);
Tensor operator-(Tensor const &a, Tensor const &b);

Tensor matmul(Tensor const &a, Tensor const &b);
Tensor transpose(Tensor const &a);

Tensor sum(Tensor const &a);
Tensor mean(Tensor const &a);
/// Column means, 1 x cols.
Tensor mean_rows(Tensor const &a);

// Elementwise nonlinearities.
Tensor tanh(Tensor const &a);
Tensor sigmoid(Tensor const &a);
Tensor gelu(Tensor const &a);
Tensor log(Tensor const &a);

/// axis 1 (or -1): each row sums to one. axis 0: each column.
Tensor softmax(Tensor const &logits, int axis = -1);
Tensor log_softmax(Tensor const &logits);

/// -log(p[target]) for a 1 x n (or n x 1) distribution, with p clamped to
/// kProbabilityFloor. The gradient flows back through whatever produced p.
Tensor cross_entropy(Tensor const &probabilities, Index target);
/// Mean over rows of -log softmax(logits[r])[targets[r]].
Tensor cross_entropy_with_logits(Tensor const &logits, std::span<int const> targets);

/// Normalizes each row to zero mean / unit variance, then applies
/// `gain` and `bias` (both 1 x cols).
Tensor layer_norm(Tensor const &x, Tensor const &gain, Tensor const &bias);

/// Cosine of two equally sized tensors as a 1 x 1 tensor. Zero norm on
/// either side yields 0 with zero gradient.
Tensor cosine_similarity(Tensor const &a, Tensor const &b);

Tensor gather_rows(Tensor const &table, std::span<int const> ids);
Tensor slice_rows(Tensor const &a, Index start, Index count);
Tensor slice_cols(Tensor const &a, Index start, Index count);
Tensor concat_cols(std::vector<Tensor> const &parts);
Tensor concat_rows(std::vector<Tensor> const &parts);

/// Inverted dropout; identity when `rate` is 0 or `rng` is null.
Tensor dropout(Tensor const &a, Scalar rate, std::mt19937_64 *rng);

} // namespace cloze::ad
