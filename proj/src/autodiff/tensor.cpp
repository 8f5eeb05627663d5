#include "cloze/autodiff/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace cloze::ad {

namespace {
thread_local bool g_grad_enabled = true;
thread_local std::uint64_t g_sequence = 0;
} // namespace

std::string to_string(Shape shape)
{
  return "[" + std::to_string(shape[0]) + "x" + std::to_string(shape[1]) + "]";
}

Tensor::Tensor()
  : Tensor(Matrix::Zero(1, 1), false)
{
}

Tensor::Tensor(Matrix value, bool requires_grad)
  : node_(std::make_shared<Node>())
{
  if (value.size() == 0) { throw ShapeError("tensor shape must be positive, got " + to_string({value.rows(), value.cols()})); }
  node_->grad = Matrix::Zero(value.rows(), value.cols());
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
  node_->sequence = g_sequence++;
}

Tensor::Tensor(std::shared_ptr<Node> node)
  : node_(std::move(node))
{
}

Tensor Tensor::zeros(Index rows, Index cols, bool requires_grad)
{
  return Tensor(Matrix::Zero(rows, cols), requires_grad);
}

Tensor Tensor::scalar(Scalar v, bool requires_grad)
{
  Matrix m(1, 1);
  m(0, 0) = v;
  return Tensor(std::move(m), requires_grad);
}

Tensor Tensor::row(std::vector<Scalar> const &values, bool requires_grad)
{
  Matrix m(1, static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) { m(0, static_cast<Index>(i)) = values[i]; }
  return Tensor(std::move(m), requires_grad);
}

Scalar Tensor::item() const
{
  if (size() != 1) { throw ContractError("item() on non-scalar tensor " + to_string(shape())); }
  return node_->value(0, 0);
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard()
  : previous_(g_grad_enabled)
{
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor make_result(Matrix value, std::vector<Tensor> const &parents,
                   std::function<void(Node const &)> backward_fn)
{
  auto node = std::make_shared<Node>();
  node->sequence = g_sequence++;
  bool const needs = g_grad_enabled && std::any_of(parents.begin(), parents.end(),
                                                   [](Tensor const &p) { return p.requires_grad(); });
  node->grad = Matrix::Zero(value.rows(), value.cols());
  node->value = std::move(value);
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto const &p : parents) { node->parents.push_back(p.node()); }
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

void backward(Tensor const &loss)
{
  if (loss.size() != 1) {
    throw ContractError("backward() requires a scalar loss, got " + to_string(loss.shape()));
  }
  if (!loss.requires_grad()) { return; }

  std::vector<Node *> order;
  std::unordered_set<Node *> seen;
  std::vector<Node *> stack{loss.node().get()};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    Node *n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (auto const &p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) { stack.push_back(p.get()); }
    }
  }
  std::sort(order.begin(), order.end(), [](Node const *a, Node const *b) { return a->sequence > b->sequence; });

  // Leaf contributions of this pass are summed in a clean buffer and added to
  // the existing grad once, so repeated passes accumulate exactly.
  std::vector<std::pair<Node *, Matrix>> stashed;
  for (Node *n : order) {
    if (!n->backward_fn) {
      stashed.emplace_back(n, n->grad);
    }
    n->grad.setZero();
  }
  loss.node()->grad.array() += 1.0;
  for (Node *n : order) {
    if (n->backward_fn) { n->backward_fn(*n); }
  }
  for (auto &[n, previous] : stashed) { n->grad += previous; }
}

} // namespace cloze::ad
