#include "cloze/autodiff/ops.hpp"

#include <numbers>

namespace cloze::ad {

namespace {

template <typename Expr>
void accumulate(Tensor const &t, Expr const &contribution)
{
  if (t.requires_grad()) { t.node()->grad += contribution; }
}

enum class Broadcast { same, row, scalar };

Broadcast broadcast_kind(Tensor const &a, Tensor const &b, char const *op)
{
  if (a.shape() == b.shape()) { return Broadcast::same; }
  if (b.rows() == 1 && b.cols() == a.cols()) { return Broadcast::row; }
  if (b.size() == 1) { return Broadcast::scalar; }
  throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(b.shape()) + " onto " + to_string(a.shape()));
}

bool broadcastable_onto(Tensor const &small, Tensor const &big)
{
  return small.shape() != big.shape() && (small.size() == 1 || (small.rows() == 1 && small.cols() == big.cols()));
}

Matrix reduce_to(Matrix const &g, Broadcast kind)
{
  switch (kind) {
  case Broadcast::row: return g.colwise().sum();
  case Broadcast::scalar: return Matrix::Constant(1, 1, g.sum());
  default: return g;
  }
}

Matrix softmax_rows(Matrix const &x)
{
  Matrix y = (x.colwise() - x.rowwise().maxCoeff()).array().exp().matrix();
  y.array().colwise() /= y.rowwise().sum().array();
  return y;
}

Matrix softmax_rows_backward(Matrix const &y, Matrix const &g)
{
  Eigen::VectorXd const dot = (y.array() * g.array()).rowwise().sum();
  return (y.array() * (g.array().colwise() - dot.array())).matrix();
}

} // namespace

Tensor add(Tensor const &a, Tensor const &b)
{
  if (broadcastable_onto(a, b)) { return add(b, a); }
  auto const kind = broadcast_kind(a, b, "add");
  Matrix out = a.value();
  switch (kind) {
  case Broadcast::same: out += b.value(); break;
  case Broadcast::row: out.rowwise() += b.value().row(0); break;
  case Broadcast::scalar: out.array() += b.value()(0, 0); break;
  }
  return make_result(std::move(out), {a, b}, [a, b, kind](Node const &self) {
    accumulate(a, self.grad);
    if (b.requires_grad()) { accumulate(b, reduce_to(self.grad, kind)); }
  });
}

Tensor sub(Tensor const &a, Tensor const &b)
{
  return add(a, scale(b, -1.0));
}

Tensor operator+(Tensor const &a, Tensor const &b) { return add(a, b); }
Tensor operator-(Tensor const &a, Tensor const &b) { return sub(a, b); }

Tensor hadamard(Tensor const &a, Tensor const &b)
{
  if (broadcastable_onto(a, b)) { return hadamard(b, a); }
  auto const kind = broadcast_kind(a, b, "hadamard");
  Matrix out;
  switch (kind) {
  case Broadcast::same: out = a.value().cwiseProduct(b.value()); break;
  case Broadcast::row: out = a.value().array().rowwise() * b.value().row(0).array(); break;
  case Broadcast::scalar: out = a.value() * b.value()(0, 0); break;
  }
  return make_result(std::move(out), {a, b}, [a, b, kind](Node const &self) {
    Matrix const &g = self.grad;
    switch (kind) {
    case Broadcast::same:
      accumulate(a, g.cwiseProduct(b.value()));
      accumulate(b, g.cwiseProduct(a.value()));
      break;
    case Broadcast::row:
      accumulate(a, (g.array().rowwise() * b.value().row(0).array()).matrix());
      accumulate(b, g.cwiseProduct(a.value()).colwise().sum());
      break;
    case Broadcast::scalar:
      accumulate(a, g * b.value()(0, 0));
      accumulate(b, Matrix::Constant(1, 1, g.cwiseProduct(a.value()).sum()));
      break;
    }
  });
}

Tensor scale(Tensor const &a, Scalar factor)
{
  return make_result(a.value() * factor, {a}, [a, factor](Node const &self) { accumulate(a, self.grad * factor); });
}

Tensor matmul(Tensor const &a, Tensor const &b)
{
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  Matrix out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  return make_result(std::move(out), {a, b}, [a, b](Node const &self) {
    if (a.requires_grad()) { a.node()->grad.noalias() += self.grad * b.value().transpose(); }
    if (b.requires_grad()) { b.node()->grad.noalias() += a.value().transpose() * self.grad; }
  });
}

Tensor transpose(Tensor const &a)
{
  return make_result(a.value().transpose(), {a}, [a](Node const &self) { accumulate(a, self.grad.transpose()); });
}

Tensor sum(Tensor const &a)
{
  return make_result(Matrix::Constant(1, 1, a.value().sum()), {a}, [a](Node const &self) {
    accumulate(a, Matrix::Constant(a.rows(), a.cols(), self.grad(0, 0)));
  });
}

Tensor mean(Tensor const &a)
{
  return scale(sum(a), 1.0 / static_cast<Scalar>(a.size()));
}

Tensor mean_rows(Tensor const &a)
{
  Scalar const inv = 1.0 / static_cast<Scalar>(a.rows());
  return make_result(a.value().colwise().sum() * inv, {a}, [a, inv](Node const &self) {
    if (a.requires_grad()) { a.node()->grad.rowwise() += self.grad.row(0) * inv; }
  });
}

Tensor tanh(Tensor const &a)
{
  Matrix out = a.value().array().tanh().matrix();
  return make_result(std::move(out), {a}, [a](Node const &self) {
    accumulate(a, (self.grad.array() * (1.0 - self.value.array().square())).matrix());
  });
}

Tensor sigmoid(Tensor const &a)
{
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return make_result(std::move(out), {a}, [a](Node const &self) {
    accumulate(a, (self.grad.array() * self.value.array() * (1.0 - self.value.array())).matrix());
  });
}

namespace {
constexpr Scalar kGeluC = 0.7978845608028654; // sqrt(2 / pi)
constexpr Scalar kGeluK = 0.044715;
} // namespace

Tensor gelu(Tensor const &a)
{
  Scalar const c = kGeluC;
  Scalar const k = kGeluK;
  auto const x = a.value().array();
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> const t = (c * (x + k * x.cube())).tanh();
  Matrix out = (0.5 * x * (1.0 + t)).matrix();
  return make_result(std::move(out), {a}, [a, t, c, k](Node const &self) {
    auto const x = a.value().array();
    auto const dt = (1.0 - t.square()) * c * (1.0 + 3.0 * k * x.square());
    accumulate(a, (self.grad.array() * (0.5 * (1.0 + t) + 0.5 * x * dt)).matrix());
  });
}

Tensor log(Tensor const &a)
{
  return make_result(a.value().array().log().matrix(), {a}, [a](Node const &self) {
    accumulate(a, (self.grad.array() / a.value().array()).matrix());
  });
}

Tensor softmax(Tensor const &logits, int axis)
{
  if (axis != 0 && axis != 1 && axis != -1) { throw ShapeError("softmax: axis must be 0, 1 or -1"); }
  bool const by_column = axis == 0;
  Matrix out = by_column ? Matrix(softmax_rows(logits.value().transpose()).transpose()) : softmax_rows(logits.value());
  return make_result(std::move(out), {logits}, [logits, by_column](Node const &self) {
    if (!logits.requires_grad()) { return; }
    if (by_column) {
      logits.node()->grad += softmax_rows_backward(self.value.transpose(), self.grad.transpose()).transpose();
    } else {
      logits.node()->grad += softmax_rows_backward(self.value, self.grad);
    }
  });
}

Tensor log_softmax(Tensor const &logits)
{
  Matrix const &x = logits.value();
  Eigen::VectorXd const max = x.rowwise().maxCoeff();
  Matrix shifted = x.colwise() - max;
  Eigen::VectorXd const lse = shifted.array().exp().rowwise().sum().log();
  Matrix out = shifted.colwise() - lse;
  return make_result(std::move(out), {logits}, [logits](Node const &self) {
    if (!logits.requires_grad()) { return; }
    Matrix const p = self.value.array().exp().matrix();
    Eigen::VectorXd const gsum = self.grad.rowwise().sum();
    logits.node()->grad += self.grad - (p.array().colwise() * gsum.array()).matrix();
  });
}

Tensor cross_entropy(Tensor const &probabilities, Index target)
{
  if (probabilities.rows() != 1 && probabilities.cols() != 1) {
    throw ShapeError("cross_entropy: expected a vector, got " + to_string(probabilities.shape()));
  }
  if (target < 0 || target >= probabilities.size()) {
    throw ContractError("cross_entropy: target " + std::to_string(target) + " out of range");
  }
  Scalar const p = probabilities.value().reshaped<Eigen::RowMajor>()(target);
  bool const clamped = p < kProbabilityFloor;
  Scalar const used = clamped ? kProbabilityFloor : p;
  return make_result(Matrix::Constant(1, 1, -std::log(used)), {probabilities},
                     [probabilities, target, clamped, used](Node const &self) {
                       if (!probabilities.requires_grad() || clamped) { return; }
                       probabilities.node()->grad.reshaped<Eigen::RowMajor>()(target) -= self.grad(0, 0) / used;
                     });
}

Tensor cross_entropy_with_logits(Tensor const &logits, std::span<int const> targets)
{
  if (static_cast<Index>(targets.size()) != logits.rows()) {
    throw ShapeError("cross_entropy_with_logits: " + std::to_string(targets.size()) + " targets for " +
                     to_string(logits.shape()) + " logits");
  }
  Matrix const &x = logits.value();
  Matrix p = softmax_rows(x);
  Scalar total = 0.0;
  for (Index r = 0; r < x.rows(); ++r) {
    auto const t = targets[static_cast<std::size_t>(r)];
    if (t < 0 || t >= x.cols()) { throw ContractError("cross_entropy_with_logits: target out of range"); }
    total -= std::log(std::max(p(r, t), kProbabilityFloor));
  }
  Scalar const inv = 1.0 / static_cast<Scalar>(x.rows());
  std::vector<int> ids(targets.begin(), targets.end());
  return make_result(Matrix::Constant(1, 1, total * inv), {logits},
                     [logits, p = std::move(p), ids = std::move(ids), inv](Node const &self) {
                       if (!logits.requires_grad()) { return; }
                       Matrix d = p;
                       for (Index r = 0; r < d.rows(); ++r) { d(r, ids[static_cast<std::size_t>(r)]) -= 1.0; }
                       logits.node()->grad += d * (self.grad(0, 0) * inv);
                     });
}

Tensor layer_norm(Tensor const &x, Tensor const &gain, Tensor const &bias)
{
  if (gain.rows() != 1 || gain.cols() != x.cols() || bias.shape() != gain.shape()) {
    throw ShapeError("layer_norm: gain/bias " + to_string(gain.shape()) + "/" + to_string(bias.shape()) +
                     " do not match " + to_string(x.shape()));
  }
  Index const n = x.cols();
  Eigen::VectorXd const mu = x.value().rowwise().mean();
  Matrix centered = x.value().colwise() - mu;
  Eigen::VectorXd const var = centered.array().square().rowwise().sum() / static_cast<Scalar>(n);
  Eigen::VectorXd const inv_std = (var.array() + kLayerNormEpsilon).rsqrt();
  Matrix normalized = centered.array().colwise() * inv_std.array();
  Matrix out = normalized.array().rowwise() * gain.value().row(0).array();
  out.rowwise() += bias.value().row(0);
  return make_result(
    std::move(out), {x, gain, bias}, [x, gain, bias, normalized = std::move(normalized), inv_std, n](Node const &self) {
      Matrix const &g = self.grad;
      accumulate(gain, g.cwiseProduct(normalized).colwise().sum());
      accumulate(bias, g.colwise().sum());
      if (!x.requires_grad()) { return; }
      Matrix const dxhat = g.array().rowwise() * gain.value().row(0).array();
      Eigen::VectorXd const s1 = dxhat.rowwise().sum();
      Eigen::VectorXd const s2 = dxhat.cwiseProduct(normalized).rowwise().sum();
      Matrix dx = (static_cast<Scalar>(n) * dxhat.array()).matrix();
      dx.colwise() -= s1;
      dx -= (normalized.array().colwise() * s2.array()).matrix();
      dx.array().colwise() *= inv_std.array() / static_cast<Scalar>(n);
      x.node()->grad += dx;
    });
}

Tensor cosine_similarity(Tensor const &a, Tensor const &b)
{
  if (a.size() != b.size()) {
    throw ShapeError("cosine_similarity: sizes differ, " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  Scalar const na = a.value().norm();
  Scalar const nb = b.value().norm();
  if (na == 0.0 || nb == 0.0) { return make_result(Matrix::Zero(1, 1), {a, b}, [](Node const &) {}); }
  Scalar const dot = a.value().reshaped().dot(b.value().reshaped());
  Scalar const c = dot / (na * nb);
  return make_result(Matrix::Constant(1, 1, c), {a, b}, [a, b, na, nb, c](Node const &self) {
    Scalar const g = self.grad(0, 0);
    accumulate(a, (b.value() / (na * nb) - a.value() * (c / (na * na))) * g);
    accumulate(b, (a.value() / (na * nb) - b.value() * (c / (nb * nb))) * g);
  });
}

Tensor gather_rows(Tensor const &table, std::span<int const> ids)
{
  Matrix out(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw ContractError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                          std::to_string(table.rows()) + " rows");
    }
    out.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<int> rows(ids.begin(), ids.end());
  return make_result(std::move(out), {table}, [table, rows = std::move(rows)](Node const &self) {
    if (!table.requires_grad()) { return; }
    auto &g = table.node()->grad;
    for (std::size_t i = 0; i < rows.size(); ++i) { g.row(rows[i]) += self.grad.row(static_cast<Index>(i)); }
  });
}

Tensor slice_rows(Tensor const &a, Index start, Index count)
{
  if (start < 0 || count <= 0 || start + count > a.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", +" + std::to_string(count) + ") outside " +
                     to_string(a.shape()));
  }
  return make_result(a.value().middleRows(start, count), {a}, [a, start, count](Node const &self) {
    if (a.requires_grad()) { a.node()->grad.middleRows(start, count) += self.grad; }
  });
}

Tensor slice_cols(Tensor const &a, Index start, Index count)
{
  if (start < 0 || count <= 0 || start + count > a.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", +" + std::to_string(count) + ") outside " +
                     to_string(a.shape()));
  }
  return make_result(a.value().middleCols(start, count), {a}, [a, start, count](Node const &self) {
    if (a.requires_grad()) { a.node()->grad.middleCols(start, count) += self.grad; }
  });
}

Tensor concat_cols(std::vector<Tensor> const &parts)
{
  if (parts.empty()) { throw ShapeError("concat_cols: no inputs"); }
  Index cols = 0;
  for (auto const &p : parts) {
    if (p.rows() != parts.front().rows()) { throw ShapeError("concat_cols: row counts differ"); }
    cols += p.cols();
  }
  Matrix out(parts.front().rows(), cols);
  Index offset = 0;
  for (auto const &p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return make_result(std::move(out), parts, [parts](Node const &self) {
    Index offset = 0;
    for (auto const &p : parts) {
      if (p.requires_grad()) { p.node()->grad += self.grad.middleCols(offset, p.cols()); }
      offset += p.cols();
    }
  });
}

Tensor concat_rows(std::vector<Tensor> const &parts)
{
  if (parts.empty()) { throw ShapeError("concat_rows: no inputs"); }
  Index rows = 0;
  for (auto const &p : parts) {
    if (p.cols() != parts.front().cols()) { throw ShapeError("concat_rows: column counts differ"); }
    rows += p.rows();
  }
  Matrix out(rows, parts.front().cols());
  Index offset = 0;
  for (auto const &p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  return make_result(std::move(out), parts, [parts](Node const &self) {
    Index offset = 0;
    for (auto const &p : parts) {
      if (p.requires_grad()) { p.node()->grad += self.grad.middleRows(offset, p.rows()); }
      offset += p.rows();
    }
  });
}

Tensor dropout(Tensor const &a, Scalar rate, std::mt19937_64 *rng)
{
  if (rate <= 0.0 || rng == nullptr) { return a; }
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  Scalar const kept = 1.0 / (1.0 - rate);
  for (Index i = 0; i < mask.size(); ++i) { mask.data()[i] = keep(*rng) ? kept : 0.0; }
  Matrix out = a.value().cwiseProduct(mask);
  return make_result(std::move(out), {a}, [a, mask = std::move(mask)](Node const &self) {
    accumulate(a, self.grad.cwiseProduct(mask));
  });
}

} // namespace cloze::ad
