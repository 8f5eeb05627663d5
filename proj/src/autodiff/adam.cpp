#include "cloze/autodiff/adam.hpp"

#include <cmath>

namespace cloze::ad {

AdamState::AdamState(std::span<Tensor const> params, AdamOptions opts)
  : options(opts)
{
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (auto const &p : params) {
    first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void adam_step(std::span<Tensor> params, AdamState &state)
{
  if (params.size() != state.first_moment.size()) {
    throw ContractError("adam_step: state tracks " + std::to_string(state.first_moment.size()) + " parameters, got " +
                        std::to_string(params.size()));
  }
  ++state.step;
  auto const &o = state.options;
  Scalar const t = static_cast<Scalar>(state.step);
  Scalar const c1 = 1.0 - std::pow(o.beta1, t);
  Scalar const c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix const &g = params[i].grad();
    if (g.isZero(0.0)) { continue; }
    Matrix &m = state.first_moment[i];
    Matrix &v = state.second_moment[i];
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
    params[i].mutable_value().array() -=
      o.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + o.epsilon);
  }
}

Scalar clip_grad_norm(std::span<Tensor> params, Scalar max_norm)
{
  Scalar sq = 0.0;
  for (auto const &p : params) { sq += p.grad().squaredNorm(); }
  Scalar const norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    Scalar const factor = max_norm / norm;
    for (auto &p : params) { p.mutable_grad() *= factor; }
  }
  return norm;
}

void zero_grad(std::span<Tensor> params)
{
  for (auto &p : params) { p.zero_grad(); }
}

} // namespace cloze::ad
