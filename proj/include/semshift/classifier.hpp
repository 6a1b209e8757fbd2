#pragma once

#include "semshift/sampling.hpp"
#include "semshift/types.hpp"

#include <nlohmann/json.hpp>

#include <string_view>

namespace semshift {

/// Parameters of the 2d -> H -> 1 network (ReLU hidden layer, sigmoid output).
struct MlpWeights {
  Matrix w1;  ///< 2d x H
  Vector b1;  ///< H
  Vector w2;  ///< H (the H x 1 output matrix)
  double b2 = 0.0;

  [[nodiscard]] Eigen::Index input_size() const { return w1.rows(); }
  [[nodiscard]] Eigen::Index hidden_size() const { return w1.cols(); }
  [[nodiscard]] bool all_finite() const;
};

inline constexpr int kDefaultHidden = 100;
inline constexpr double kProbabilityClamp = 1e-7;

/// Glorot-uniform W1 and W2, zero biases. `d` is the embedding dimension.
MlpWeights init_weights(int d, int hidden, Rng& rng);

/// sigma(ReLU(x W1 + b1) . W2 + b2) for one input row of length 2d.
double forward(const MlpWeights& w, const Eigen::Ref<const RowVector>& x);
/// Row-wise forward pass.
Vector forward_batch(const MlpWeights& w, const Matrix& x);

/// Same shapes as MlpWeights.
struct Gradients {
  Matrix w1;
  Vector b1;
  Vector w2;
  double b2 = 0.0;
};

struct LossGradient {
  double loss = 0.0;
  Gradients grad;
};

/// Mean binary cross-entropy with the sigmoid output clamped to
/// [1e-7, 1 - 1e-7]. Outputs on the clamp contribute zero gradient.
double bce_loss(const MlpWeights& w, const Matrix& x, const Vector& y);
LossGradient loss_and_gradient(const MlpWeights& w, const Matrix& x, const Vector& y);

/// One full-batch gradient descent step. Returns the pre-step loss.
/// Throws NumericalError on a non-finite loss or gradient.
double train_step(MlpWeights& w, const PerturbationBatch& batch, double lr);

enum class OptimizerKind { gradient_descent, adam };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view to_string(OptimizerKind kind);

/// Stateful optimizer driving repeated updates of one set of weights.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr);

  /// One update on (x, y); returns the pre-step loss.
  double step(MlpWeights& w, const Matrix& x, const Vector& y);
  double step(MlpWeights& w, const PerturbationBatch& batch) {
    return step(w, batch.features, batch.labels);
  }

  [[nodiscard]] OptimizerKind kind() const { return kind_; }
  [[nodiscard]] double learning_rate() const { return lr_; }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  OptimizerKind kind_;
  double lr_;
  long steps_ = 0;
  Gradients m_;
  Gradients v_;
};

struct Prediction {
  int label = 0;
  double probability = 0.5;
};

/// label = 1 iff forward([a_row | b_row]) > threshold.
Prediction predict(const MlpWeights& w, const Eigen::Ref<const RowVector>& a_row,
                   const Eigen::Ref<const RowVector>& b_row, double threshold = 0.5);

nlohmann::json to_json(const MlpWeights& w);
MlpWeights weights_from_json(const nlohmann::json& doc);

}  // namespace semshift
