#include "cloze/autodiff/adam.hpp"
#include "cloze/autodiff/ops.hpp"
#include "cloze/autodiff/parameters.hpp"
#include "support/gradcheck.hpp"
#include "support/op_catalog.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace cloze;
using ad::Matrix;
using ad::Tensor;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows)
{
  Matrix m(static_cast<ad::Index>(rows.size()), static_cast<ad::Index>(rows.begin()->size()));
  ad::Index r = 0;
  for (auto const &row : rows) {
    ad::Index c = 0;
    for (double v : row) { m(r, c++) = v; }
    ++r;
  }
  return m;
}

} // namespace

TEST_CASE("tensor storage and grad slot")
{
  Tensor t = Tensor::zeros(2, 3, true);
  CHECK(t.shape() == ad::Shape{2, 3});
  CHECK(t.grad().rows() == 2);
  CHECK(t.grad().cols() == 3);
  CHECK(t.grad().isZero(0.0));
  t.mutable_grad().setOnes();
  t.zero_grad();
  CHECK(t.grad().isZero(0.0));

  Tensor alias = t;
  alias.mutable_value()(0, 0) = 7.0;
  CHECK(t.value()(0, 0) == 7.0);
  CHECK(alias.same_storage(t));

  CHECK_THROWS_AS(Tensor(Matrix(0, 3)), ad::ShapeError);
  CHECK_THROWS_AS(Tensor::zeros(2, 2).item(), ad::ContractError);
}

TEST_CASE("matmul")
{
  SUBCASE("hand-computed product")
  {
    Tensor const c = ad::matmul(Tensor(mat({{1, 2}, {3, 4}})), Tensor(mat({{5}, {6}})));
    CHECK(c.value() == mat({{17}, {39}}));
  }
  SUBCASE("identity")
  {
    Tensor const m(mat({{1, -2, 3}, {0.5, 4, 9}, {2, 2, 2}}));
    CHECK(ad::matmul(Tensor(Matrix::Identity(3, 3)), m).value() == m.value());
  }
  SUBCASE("shape error names both shapes")
  {
    try {
      ad::matmul(Tensor::zeros(2, 3), Tensor::zeros(2, 3));
      FAIL("expected a shape error");
    } catch (ad::ShapeError const &e) {
      std::string const what = e.what();
      CHECK(what.find("2x3") != std::string::npos);
      CHECK(what.find("2x3", what.find("2x3") + 1) != std::string::npos);
    }
  }
  SUBCASE("gradient of sum(a b) on random 4x4 inputs")
  {
    std::mt19937_64 rng(11);
    auto a = testing::random_tensor(rng, 4, 4);
    auto b = testing::random_tensor(rng, 4, 4);
    CHECK(testing::max_gradient_error([&] { return ad::sum(ad::matmul(a, b)); }, {a, b}) < 1e-4);
  }
}

TEST_CASE("softmax")
{
  CHECK(ad::softmax(Tensor::row({0, 0})).value().isApprox(mat({{0.5, 0.5}}), 1e-15));
  auto const big = ad::softmax(Tensor::row({1000, 1000})).value();
  CHECK(std::isfinite(big(0, 0)));
  CHECK(big(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  // exp-normalize oracle in long double.
  long double const e1 = std::exp(1.0L), e2 = std::exp(2.0L), e3 = std::exp(3.0L);
  long double const z = e1 + e2 + e3;
  auto const p = ad::softmax(Tensor::row({1, 2, 3})).value();
  CHECK(std::abs(p(0, 0) - static_cast<double>(e1 / z)) < 1e-12);
  CHECK(std::abs(p(0, 1) - static_cast<double>(e2 / z)) < 1e-12);
  CHECK(std::abs(p(0, 2) - static_cast<double>(e3 / z)) < 1e-12);

  SUBCASE("columns")
  {
    auto const q = ad::softmax(Tensor(mat({{0, 5}, {0, 5}})), 0).value();
    CHECK(q.isApprox(mat({{0.5, 0.5}, {0.5, 0.5}}), 1e-15));
  }

  SUBCASE("slices sum to one and shift invariance on random input")
  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int trial = 0; trial < 100; ++trial) {
      auto x = testing::random_tensor(rng, 3, 5, -10, 10);
      auto const s = ad::softmax(x).value();
      for (ad::Index r = 0; r < 3; ++r) { CHECK(std::abs(s.row(r).sum() - 1.0) < 1e-9); }
      CHECK((s.array() >= 0.0).all());
      double const c = u(rng);
      Matrix shifted = x.value().array() + c;
      CHECK((ad::softmax(Tensor(shifted)).value() - s).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("cosine similarity")
{
  Eigen::RowVector3d const v(0.3, -2, 5);
  CHECK(ad::cosine_similarity(v, v).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ad::cosine_similarity(Eigen::RowVector2d(1, 0), Eigen::RowVector2d(0, 1)).value == 0.0);
  double const oracle = 32.0 / std::sqrt(14.0 * 77.0);
  CHECK(ad::cosine_similarity(Eigen::RowVector3d(1, 2, 3), Eigen::RowVector3d(4, 5, 6)).value ==
        doctest::Approx(oracle).epsilon(1e-14));
  CHECK(oracle == doctest::Approx(0.974631846).epsilon(1e-9));

  auto const degenerate = ad::cosine_similarity(Eigen::RowVector2d(0, 0), Eigen::RowVector2d(1, 1));
  CHECK(degenerate.degenerate);
  CHECK(degenerate.value == 0.0);

  SUBCASE("tensor form: zero norm gives 0 and no gradient")
  {
    Tensor a = Tensor::zeros(1, 3, true);
    Tensor b = Tensor::row({1, 2, 3}, true);
    auto const c = ad::cosine_similarity(a, b);
    CHECK(c.item() == 0.0);
    ad::backward(c);
    CHECK(a.grad().isZero(0.0));
    CHECK(b.grad().isZero(0.0));
  }
}

TEST_CASE("cross entropy")
{
  CHECK(ad::cross_entropy(Tensor::row({0.5, 0.5}), 0).item() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(ad::cross_entropy(Tensor::row({1.0, 0.0}), 0).item() == 0.0);
  CHECK(ad::cross_entropy(Tensor::row({1.0, 0.0}), 1).item() ==
        doctest::Approx(-std::log(ad::kProbabilityFloor)).epsilon(1e-12));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto const logits = testing::random_tensor(rng, 1, 2, -5, 5).value();
    // log-softmax oracle via log-sum-exp, independent of the softmax op.
    double const m = logits.maxCoeff();
    double const lse = m + std::log(std::exp(logits(0, 0) - m) + std::exp(logits(0, 1) - m));
    for (int label = 0; label < 2; ++label) {
      double const got = ad::cross_entropy(ad::softmax(Tensor(logits)), label).item();
      CHECK(std::abs(got - (lse - logits(0, label))) < 1e-10);
    }
  }
}

TEST_CASE("backward")
{
  SUBCASE("sum gives ones")
  {
    Tensor p(mat({{1, 2}, {3, 4}}), true);
    ad::backward(ad::sum(p));
    CHECK(p.grad() == Matrix::Ones(2, 2));
  }
  SUBCASE("sum of squares")
  {
    Tensor p = Tensor::row({1, 2, 3}, true);
    ad::backward(ad::sum(ad::hadamard(p, p)));
    CHECK(p.grad() == mat({{2, 4, 6}}));
  }
  SUBCASE("non-scalar loss is a contract violation")
  {
    Tensor p = Tensor::row({1, 2, 3}, true);
    CHECK_THROWS_AS(ad::backward(ad::scale(p, 2.0)), ad::ContractError);
  }
  SUBCASE("twice without zeroing doubles every grad exactly")
  {
    std::mt19937_64 rng(9);
    auto w = testing::random_tensor(rng, 3, 4);
    auto x = testing::random_tensor(rng, 2, 3);
    auto const loss = ad::sum(ad::tanh(ad::layer_norm(ad::matmul(x, w), Tensor::zeros(1, 4) + Tensor::scalar(1.0),
                                                      Tensor::zeros(1, 4))));
    ad::backward(loss);
    Matrix const once_w = w.grad();
    Matrix const once_x = x.grad();
    ad::backward(loss);
    CHECK(w.grad() == 2.0 * once_w);
    CHECK(x.grad() == 2.0 * once_x);
  }
  SUBCASE("shared subexpression visited once")
  {
    Tensor p = Tensor::row({2}, true);
    auto const q = ad::hadamard(p, p); // p^2
    auto const loss = ad::sum(q + q);  // 2 p^2
    ad::backward(loss);
    CHECK(p.grad()(0, 0) == 8.0);
  }
  SUBCASE("no-grad guard records nothing")
  {
    Tensor p = Tensor::row({1, 2}, true);
    Tensor out;
    {
      ad::NoGradGuard guard;
      CHECK_FALSE(ad::grad_enabled());
      out = ad::sum(ad::hadamard(p, p));
    }
    CHECK(ad::grad_enabled());
    CHECK_FALSE(out.requires_grad());
  }
}

TEST_CASE("every operation matches central differences")
{
  for (auto const &spec : testing::operation_cases()) {
    CAPTURE(spec.name);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed * 7919 + 1);
      auto c = spec.make(rng);
      CHECK(testing::max_gradient_error(c.loss, c.params) < spec.tolerance);
    }
  }
}

TEST_CASE("layer norm")
{
  Tensor const ones = Tensor(Matrix::Ones(1, 4));
  Tensor const zeros = Tensor::zeros(1, 4);
  CHECK(ad::layer_norm(Tensor::row({3, 3, 3, 3}), ones, zeros).value().isZero(0.0));

  std::mt19937_64 rng(2);
  auto const x = testing::random_tensor(rng, 5, 16, -4, 4);
  auto const y = ad::layer_norm(x, Tensor(Matrix::Ones(1, 16)), Tensor::zeros(1, 16)).value();
  for (ad::Index r = 0; r < 5; ++r) {
    double const mean = y.row(r).mean();
    double const var = (y.row(r).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-7);
    CHECK(std::abs(var - 1.0) < 1e-5 + ad::kLayerNormEpsilon);
  }
}

TEST_CASE("dropout")
{
  Tensor const x = Tensor::row({1, 2, 3, 4});
  CHECK(ad::dropout(x, 0.5, nullptr).value() == x.value());
  std::mt19937_64 rng(1);
  CHECK(ad::dropout(x, 0.0, &rng).value() == x.value());
  auto const y = ad::dropout(Tensor(Matrix::Ones(1, 1000)), 0.25, &rng).value();
  for (ad::Index i = 0; i < y.size(); ++i) { CHECK((y(0, i) == 0.0 || y(0, i) == doctest::Approx(1.0 / 0.75))); }
}

TEST_CASE("adam")
{
  SUBCASE("moments start at zero")
  {
    Tensor p = Tensor::zeros(2, 2, true);
    std::vector<Tensor> params{p};
    ad::AdamState state(params);
    CHECK(state.step == 0);
    CHECK(state.first_moment[0].isZero(0.0));
    CHECK(state.second_moment[0].isZero(0.0));
  }
  SUBCASE("first step moves by lr against the gradient sign")
  {
    Tensor p = Tensor::row({1.0, -1.0, 0.5}, true);
    p.mutable_grad() = mat({{0.3, -2.0, 1e-3}});
    std::vector<Tensor> params{p};
    ad::AdamOptions opts{0.01, 0.9, 0.999, 1e-8};
    ad::AdamState state(params, opts);
    ad::adam_step(params, state);
    // m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps).
    for (int i = 0; i < 3; ++i) {
      double const g = mat({{0.3, -2.0, 1e-3}})(0, i);
      double const expected = mat({{1.0, -1.0, 0.5}})(0, i) - 0.01 * g / (std::abs(g) + 1e-8);
      CHECK(p.value()(0, i) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(state.step == 1);
    CHECK(p.grad() == mat({{0.3, -2.0, 1e-3}}));
  }
  SUBCASE("zero gradient leaves bits unchanged, even after earlier steps")
  {
    Tensor p = Tensor::row({0.25, -3.0}, true);
    std::vector<Tensor> params{p};
    ad::AdamState state(params, {0.1});
    p.mutable_grad() = mat({{1.0, -1.0}});
    ad::adam_step(params, state);
    Matrix const before = p.value();
    Matrix const m = state.first_moment[0];
    p.zero_grad();
    ad::adam_step(params, state);
    CHECK(std::memcmp(before.data(), p.value().data(), sizeof(double) * 2) == 0);
    CHECK(state.first_moment[0] == m);
    CHECK(state.step == 2);
  }
  SUBCASE("converges on x^2 from 5")
  {
    Tensor x = Tensor::row({5.0}, true);
    std::vector<Tensor> params{x};
    ad::AdamState state(params, {0.1});
    for (int i = 0; i < 500; ++i) {
      ad::zero_grad(params);
      ad::backward(ad::sum(ad::hadamard(x, x)));
      ad::adam_step(params, state);
    }
    CHECK(std::abs(x.item()) < 1e-2);
  }
}

TEST_CASE("gradient clipping")
{
  Tensor a = Tensor::row({3.0}, true);
  Tensor b = Tensor::row({4.0}, true);
  a.mutable_grad()(0, 0) = 3.0;
  b.mutable_grad()(0, 0) = 4.0;
  std::vector<Tensor> params{a, b};
  CHECK(ad::clip_grad_norm(params, 1.0) == doctest::Approx(5.0));
  CHECK(a.grad()(0, 0) == doctest::Approx(0.6));
  CHECK(b.grad()(0, 0) == doctest::Approx(0.8));
  CHECK(ad::clip_grad_norm(params, 10.0) == doctest::Approx(1.0));
  CHECK(a.grad()(0, 0) == doctest::Approx(0.6));
}

TEST_CASE("parameter init")
{
  auto r1 = ad::substream(42, "init");
  auto r2 = ad::substream(42, "init");
  auto r3 = ad::substream(42, "shuffle");
  CHECK(r1() == r2());
  CHECK(r1() != r3());

  std::mt19937_64 rng(0);
  auto const w = ad::normal_parameter(100, 100, rng);
  CHECK(w.requires_grad());
  double const mean = w.value().mean();
  double const sd = std::sqrt((w.value().array() - mean).square().mean());
  CHECK(std::abs(mean) < 1e-3);
  CHECK(sd == doctest::Approx(ad::kInitStddev).epsilon(0.05));
  CHECK(ad::zero_parameter(2, 3).value().isZero(0.0));
}
