#pragma once

#include "cloze/autodiff/tensor.hpp"

#include <cstdint>
#include <span>

namespace cloze::ad {

struct AdamOptions
{
  Scalar learning_rate = 1e-3;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar epsilon = 1e-8;
};

/// Moment accumulators for a fixed, ordered parameter list.
class AdamState
{
public:
  AdamState(std::span<Tensor const> params, AdamOptions options = {});

  AdamOptions options;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update. A parameter whose grad is entirely zero
/// keeps its value and moments untouched; the step counter always advances.
/// Grads are left as they are.
void adam_step(std::span<Tensor> params, AdamState &state);

/// Rescales all grads so their joint L2 norm is at most `max_norm`. Returns
/// the norm before clipping.
Scalar clip_grad_norm(std::span<Tensor> params, Scalar max_norm);

void zero_grad(std::span<Tensor> params);

} // namespace cloze::ad
