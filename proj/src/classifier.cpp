#include "semshift/classifier.hpp"

#include "semshift/errors.hpp"

#include <algorithm>
#include <cmath>

namespace semshift {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_input(const MlpWeights& w, Eigen::Index cols) {
  if (cols != w.input_size())
    throw DataError("classifier expects inputs of length " + std::to_string(w.input_size()) +
                    ", got " + std::to_string(cols));
}

void check_batch(const MlpWeights& w, const Matrix& x, const Vector& y) {
  check_input(w, x.cols());
  if (x.rows() == 0) throw DataError("empty training batch");
  if (x.rows() != y.size()) throw DataError("feature and label counts differ");
}

bool all_finite(const Gradients& g) {
  return g.w1.allFinite() && g.b1.allFinite() && g.w2.allFinite() && std::isfinite(g.b2);
}

}  // namespace

bool MlpWeights::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && std::isfinite(b2);
}

MlpWeights init_weights(int d, int hidden, Rng& rng) {
  if (d < 1 || hidden < 1) throw UsageError("network dimensions must be positive");
  const Eigen::Index in = 2 * static_cast<Eigen::Index>(d);
  const Eigen::Index h = hidden;
  MlpWeights w;
  const double bound1 = std::sqrt(6.0 / static_cast<double>(in + h));
  const double bound2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  std::uniform_real_distribution<double> u1(-bound1, bound1);
  std::uniform_real_distribution<double> u2(-bound2, bound2);
  w.w1.resize(in, h);
  for (Eigen::Index i = 0; i < in; ++i)
    for (Eigen::Index j = 0; j < h; ++j) w.w1(i, j) = u1(rng);
  w.b1 = Vector::Zero(h);
  w.w2.resize(h);
  for (Eigen::Index j = 0; j < h; ++j) w.w2[j] = u2(rng);
  w.b2 = 0.0;
  return w;
}

double forward(const MlpWeights& w, const Eigen::Ref<const RowVector>& x) {
  check_input(w, x.size());
  const RowVector hidden = ((x * w.w1).transpose() + w.b1).cwiseMax(0.0).transpose();
  return sigmoid(hidden.dot(w.w2) + w.b2);
}

Vector forward_batch(const MlpWeights& w, const Matrix& x) {
  check_input(w, x.cols());
  Eigen::MatrixXd hidden = x * w.w1;
  hidden.rowwise() += w.b1.transpose();
  hidden = hidden.cwiseMax(0.0);
  Vector z = hidden * w.w2;
  return z.unaryExpr([&](double v) { return sigmoid(v + w.b2); });
}

double bce_loss(const MlpWeights& w, const Matrix& x, const Vector& y) {
  check_batch(w, x, y);
  const Vector p = forward_batch(w, x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    total -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
  }
  return total / static_cast<double>(p.size());
}

LossGradient loss_and_gradient(const MlpWeights& w, const Matrix& x, const Vector& y) {
  check_batch(w, x, y);
  const auto n = x.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::MatrixXd pre = x * w.w1;
  pre.rowwise() += w.b1.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  const Vector z = (hidden * w.w2).array() + w.b2;

  LossGradient out;
  Vector dz(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = sigmoid(z[i]);
    const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    total -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
    // d loss / d p is -(y/p) + (1-y)/(1-p); d p / d z is p (1-p). Clamped
    // outputs are constant in z.
    const bool clamped = p < kProbabilityClamp || p > 1.0 - kProbabilityClamp;
    dz[i] = clamped ? 0.0 : (p - y[i]) * inv_n;
  }
  out.loss = total * inv_n;

  out.grad.w2 = hidden.transpose() * dz;
  out.grad.b2 = dz.sum();
  Eigen::MatrixXd dhidden = dz * w.w2.transpose();
  dhidden = dhidden.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  out.grad.w1 = x.transpose() * dhidden;
  out.grad.b1 = dhidden.colwise().sum().transpose();
  return out;
}

double train_step(MlpWeights& w, const PerturbationBatch& batch, double lr) {
  Optimizer opt(OptimizerKind::gradient_descent, lr);
  return opt.step(w, batch);
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "gd" || name == "sgd") return OptimizerKind::gradient_descent;
  if (name == "adam") return OptimizerKind::adam;
  throw UsageError("unknown optimizer '" + std::string(name) + "' (expected gd or adam)");
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "gd";
}

Optimizer::Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw UsageError("learning rate must be positive");
}

double Optimizer::step(MlpWeights& w, const Matrix& x, const Vector& y) {
  auto [loss, g] = loss_and_gradient(w, x, y);
  if (!std::isfinite(loss) || !all_finite(g))
    throw NumericalError("training diverged: non-finite loss or gradient");

  if (kind_ == OptimizerKind::gradient_descent) {
    w.w1 -= lr_ * g.w1;
    w.b1 -= lr_ * g.b1;
    w.w2 -= lr_ * g.w2;
    w.b2 -= lr_ * g.b2;
  } else {
    if (steps_ == 0) {
      m_ = {Matrix::Zero(g.w1.rows(), g.w1.cols()), Vector::Zero(g.b1.size()),
            Vector::Zero(g.w2.size()), 0.0};
      v_ = m_;
    }
    ++steps_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
    const double step = lr_ * std::sqrt(c2) / c1;
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
      m = kBeta1 * m + (1.0 - kBeta1) * grad;
      v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
      param -= step * m.cwiseQuotient((v.cwiseSqrt().array() + kEpsilon).matrix());
    };
    update(w.w1, m_.w1, v_.w1, g.w1);
    update(w.b1, m_.b1, v_.b1, g.b1);
    update(w.w2, m_.w2, v_.w2, g.w2);
    m_.b2 = kBeta1 * m_.b2 + (1.0 - kBeta1) * g.b2;
    v_.b2 = kBeta2 * v_.b2 + (1.0 - kBeta2) * g.b2 * g.b2;
    w.b2 -= step * m_.b2 / (std::sqrt(v_.b2) + kEpsilon);
  }
  if (!w.all_finite()) throw NumericalError("training diverged: non-finite weights");
  return loss;
}

Prediction predict(const MlpWeights& w, const Eigen::Ref<const RowVector>& a_row,
                   const Eigen::Ref<const RowVector>& b_row, double threshold) {
  if (a_row.size() != b_row.size() || 2 * a_row.size() != w.input_size())
    throw DataError("prediction rows do not match the classifier input size");
  RowVector x(a_row.size() + b_row.size());
  x << a_row, b_row;
  Prediction p;
  p.probability = forward(w, x);
  p.label = p.probability > threshold ? 1 : 0;
  return p;
}

nlohmann::json to_json(const MlpWeights& w) {
  const auto d = w.input_size() / 2;
  std::vector<double> w1(w.w1.data(), w.w1.data() + w.w1.size());
  std::vector<double> b1(w.b1.data(), w.b1.data() + w.b1.size());
  std::vector<double> w2(w.w2.data(), w.w2.data() + w.w2.size());
  return {{"d", d}, {"H", w.hidden_size()}, {"W1", w1}, {"b1", b1}, {"W2", w2}, {"b2", w.b2}};
}

MlpWeights weights_from_json(const nlohmann::json& doc) {
  try {
    const auto d = doc.at("d").get<Eigen::Index>();
    const auto h = doc.at("H").get<Eigen::Index>();
    auto w1 = doc.at("W1").get<std::vector<double>>();
    auto b1 = doc.at("b1").get<std::vector<double>>();
    auto w2 = doc.at("W2").get<std::vector<double>>();
    if (d < 1 || h < 1 || static_cast<Eigen::Index>(w1.size()) != 2 * d * h ||
        static_cast<Eigen::Index>(b1.size()) != h || static_cast<Eigen::Index>(w2.size()) != h)
      throw DataError("weight arrays do not match d and H");
    MlpWeights w;
    w.w1 = Eigen::Map<const Matrix>(w1.data(), 2 * d, h);
    w.b1 = Eigen::Map<const Vector>(b1.data(), h);
    w.w2 = Eigen::Map<const Vector>(w2.data(), h);
    w.b2 = doc.at("b2").get<double>();
    if (!w.all_finite()) throw DataError("weights contain non-finite values");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed weights document: ") + e.what());
  }
}

}  // namespace semshift
