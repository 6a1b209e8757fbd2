#include "oracles.hpp"
#include "semshift/classifier.hpp"
#include "semshift/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace semshift;

namespace {

MlpWeights zero_weights(int d, int hidden) {
  MlpWeights w;
  w.w1 = Matrix::Zero(2 * d, hidden);
  w.b1 = Vector::Zero(hidden);
  w.w2 = Vector::Zero(hidden);
  return w;
}

MlpWeights random_weights(int d, int hidden, Rng& rng) {
  MlpWeights w;
  w.w1 = oracle::random_matrix(2 * d, hidden, rng);
  w.b1 = oracle::random_matrix(hidden, 1, rng).col(0);
  w.w2 = oracle::random_matrix(hidden, 1, rng).col(0);
  w.b2 = oracle::random_matrix(1, 1, rng)(0, 0);
  return w;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamped_bce(const MlpWeights& w, const Matrix& x, const Vector& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double p = std::clamp(forward(w, x.row(i)), kProbabilityClamp, 1.0 - kProbabilityClamp);
    total += -(y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
  }
  return total / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("init shapes, bounds and determinism") {
  Rng rng(42);
  auto w = init_weights(2, 100, rng);
  CHECK(w.w1.rows() == 4);
  CHECK(w.w1.cols() == 100);
  CHECK(w.b1.size() == 100);
  CHECK(w.w2.size() == 100);
  const double bound = std::sqrt(6.0 / 104.0);
  CHECK(w.w1.cwiseAbs().maxCoeff() <= bound);
  CHECK(w.b1.isZero());
  CHECK(w.b2 == 0.0);
  Rng again(42);
  auto w2 = init_weights(2, 100, again);
  CHECK(w.w1 == w2.w1);
  CHECK(w.w2 == w2.w2);
}

TEST_CASE("forward examples") {
  RowVector x = RowVector::Constant(4, 0.3);
  auto w = zero_weights(2, 5);
  CHECK(forward(w, x) == 0.5);
  w.b2 = 10.0;
  CHECK(forward(w, x) == doctest::Approx(0.9999546).epsilon(1e-6));

  SUBCASE("hand computed network") {
    MlpWeights h = zero_weights(1, 2);
    h.w1 << 1.0, -1.0, 0.5, 2.0;
    h.b1 << 0.1, -0.2;
    h.w2 << 0.7, -0.3;
    h.b2 = 0.05;
    RowVector in(2);
    in << 0.4, -0.6;
    const double h1 = std::max(0.0, 0.4 * 1.0 + -0.6 * 0.5 + 0.1);
    const double h2 = std::max(0.0, 0.4 * -1.0 + -0.6 * 2.0 - 0.2);
    const double expect = sigmoid(0.7 * h1 - 0.3 * h2 + 0.05);
    CHECK(std::abs(forward(h, in) - expect) < 1e-12);
    CHECK(std::abs(forward_batch(h, Matrix(in))[0] - expect) < 1e-12);
  }
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(17);
  const double eps = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 3, hidden = 4;
    auto w = random_weights(d, hidden, rng);
    Matrix x = oracle::random_matrix(6, 2 * d, rng);
    Vector y(6);
    y << 0, 1, 1, 0, 1, 0;
    auto lg = loss_and_gradient(w, x, y);
    CHECK(lg.loss == doctest::Approx(clamped_bce(w, x, y)).epsilon(1e-12));
    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + eps;
      const double up = clamped_bce(w, x, y);
      param = saved - eps;
      const double down = clamped_bce(w, x, y);
      param = saved;
      CHECK(std::abs((up - down) / (2 * eps) - analytic) < 1e-4);
    };
    for (Eigen::Index i = 0; i < w.w1.rows(); ++i)
      for (Eigen::Index j = 0; j < w.w1.cols(); ++j) probe(w.w1(i, j), lg.grad.w1(i, j));
    for (Eigen::Index j = 0; j < hidden; ++j) {
      probe(w.b1[j], lg.grad.b1[j]);
      probe(w.w2[j], lg.grad.w2[j]);
    }
    probe(w.b2, lg.grad.b2);
  }
}

TEST_CASE("gradient descent fits a separable toy batch") {
  Matrix x(4, 2);
  x << 1, 0, 0.9, 0.1, 0, 1, 0.1, 0.9;
  Vector y(4);
  y << 1, 1, 0, 0;
  PerturbationBatch batch;
  batch.features = x;
  batch.labels = y;
  Rng rng(3);
  auto w = init_weights(1, 8, rng);
  double loss = 1.0;
  for (int step = 0; step < 2000 && loss >= 0.01; ++step) {
    train_step(w, batch, 0.1);
    loss = bce_loss(w, x, y);
  }
  CHECK(loss < 0.01);
}

TEST_CASE("saturated outputs receive no gradient") {
  auto w = zero_weights(1, 3);
  w.b2 = 40.0;
  Matrix x = Matrix::Constant(3, 2, 0.5);
  Vector y = Vector::Zero(3);
  PerturbationBatch batch;
  batch.features = x;
  batch.labels = y;
  const auto before = w;
  train_step(w, batch, 1.0);
  CHECK(std::abs(w.b2 - before.b2) < 1e-6);
  CHECK((w.w1 - before.w1).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((w.w2 - before.w2).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("small learning rate gives a near-monotone loss") {
  Rng rng(12);
  Matrix x = oracle::random_matrix(40, 4, rng);
  Vector y(40);
  for (Eigen::Index i = 0; i < 40; ++i) y[i] = x(i, 0) > 0 ? 1.0 : 0.0;
  PerturbationBatch batch;
  batch.features = x;
  batch.labels = y;
  auto w = init_weights(2, 10, rng);
  double prev = train_step(w, batch, 1e-3);
  int violations = 0;
  for (int step = 0; step < 50; ++step) {
    const double now = train_step(w, batch, 1e-3);
    if (now > prev) ++violations;
    prev = now;
  }
  CHECK(violations <= 2);
}

TEST_CASE("adam reduces the loss") {
  Rng rng(21);
  Matrix x = oracle::random_matrix(60, 4, rng);
  Vector y(60);
  for (Eigen::Index i = 0; i < 60; ++i) y[i] = x(i, 1) - x(i, 3) > 0 ? 1.0 : 0.0;
  auto w = init_weights(2, 16, rng);
  Optimizer opt(OptimizerKind::adam, 1e-2);
  const double first = opt.step(w, x, y);
  for (int step = 0; step < 300; ++step) opt.step(w, x, y);
  CHECK(bce_loss(w, x, y) < 0.5 * first);
}

TEST_CASE("optimizer names") {
  CHECK(parse_optimizer("adam") == OptimizerKind::adam);
  CHECK(parse_optimizer("gd") == OptimizerKind::gradient_descent);
  CHECK_THROWS_AS(parse_optimizer("rmsprop"), UsageError);
}

TEST_CASE("predict uses a strict threshold") {
  auto w = zero_weights(1, 2);
  RowVector a = RowVector::Zero(1), b = RowVector::Zero(1);
  auto p = predict(w, a, b);
  CHECK(p.probability == 0.5);
  CHECK(p.label == 0);
  w.b2 = 1e-9;
  CHECK(predict(w, a, b).label == 1);
}

TEST_CASE("weights survive a JSON round trip") {
  Rng rng(8);
  auto w = init_weights(3, 5, rng);
  w.b2 = 0.125;
  auto back = weights_from_json(to_json(w));
  CHECK(back.w1 == w.w1);
  CHECK(back.b1 == w.b1);
  CHECK(back.w2 == w.w2);
  CHECK(back.b2 == w.b2);
}
