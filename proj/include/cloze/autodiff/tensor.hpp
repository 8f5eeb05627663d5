#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cloze::ad {

using Scalar = double;
using Index = Eigen::Index;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using Shape = std::array<Index, 2>;

std::string to_string(Shape shape);

struct ShapeError : std::invalid_argument
{
  using std::invalid_argument::invalid_argument;
};

struct ContractError : std::logic_error
{
  using std::logic_error::logic_error;
};

/// One recorded value in the computation graph. Operations that produce a
/// node requiring grad keep their inputs alive through `parents` and know how
/// to push the node's grad back into them through `backward_fn`.
struct Node
{
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  // Creation order on the recording thread; backward replays by descending id.
  std::uint64_t sequence = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node const &)> backward_fn;
};

/// Rank-2 dense tensor with a gradient slot. Vectors are 1 x n, scalars 1 x 1.
/// Copies share the underlying node, so a parameter copied into a model and
/// into an optimizer list is one parameter.
class Tensor
{
public:
  Tensor();
  explicit Tensor(Matrix value, bool requires_grad = false);

  static Tensor zeros(Index rows, Index cols, bool requires_grad = false);
  static Tensor scalar(Scalar v, bool requires_grad = false);
  static Tensor row(std::vector<Scalar> const &values, bool requires_grad = false);

  Shape shape() const { return {rows(), cols()}; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }

  Matrix const &value() const { return node_->value; }
  Matrix &mutable_value() { return node_->value; }
  Matrix const &grad() const { return node_->grad; }
  Matrix &mutable_grad() { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  Scalar item() const;

  void zero_grad() { node_->grad.setZero(); }

  std::shared_ptr<Node> const &node() const { return node_; }
  bool same_storage(Tensor const &other) const { return node_ == other.node_; }

private:
  explicit Tensor(std::shared_ptr<Node> node);
  std::shared_ptr<Node> node_;

  friend Tensor make_result(Matrix value, std::vector<Tensor> const &parents,
                            std::function<void(Node const &)> backward_fn);
};

/// Builds the output of an operation. When grad recording is disabled or no
/// parent requires grad, the backward closure is dropped and the result is a
/// constant.
Tensor make_result(Matrix value, std::vector<Tensor> const &parents,
                   std::function<void(Node const &)> backward_fn);

bool grad_enabled();

/// Disables graph recording on this thread while alive.
class NoGradGuard
{
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(NoGradGuard const &) = delete;
  NoGradGuard &operator=(NoGradGuard const &) = delete;

private:
  bool previous_;
};

/// Replays the recorded operations reachable from `loss` in reverse
/// execution order, each exactly once. Leaf grads accumulate; intermediate
/// grads are recomputed from zero on every call.
void backward(Tensor const &loss);

} // namespace cloze::ad
