#pragma once

#include "semshift/classifier.hpp"
#include "semshift/embedding_store.hpp"
#include "semshift/orthogonal_transform.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semshift {

/// Hyper-parameters shared by S4-D and S4-A.
struct S4Params {
  int n_pos = 1000;
  int n_neg = 1000;
  double r = 0.25;
  int iterations = 100;
  double lr = 1e-2;
  OptimizerKind optimizer = OptimizerKind::adam;
  /// Optimizer updates per generated batch.
  int inner_epochs = 1;
  int hidden = kDefaultHidden;
  std::uint64_t seed = kDefaultSeed;

  /// Throws UsageError on any out-of-range field.
  void validate(bool allow_zero_iterations = true) const;
  [[nodiscard]] BatchSizes batch_sizes() const { return {n_pos, n_neg, r}; }
};

/// Named parameter profiles: "s4d" (the detection defaults) and the S4-A
/// per-language profiles "english", "german", "latin", "swedish".
S4Params s4_preset(std::string_view name);
std::vector<std::string> s4_preset_names();

struct S4DResult {
  MlpWeights weights;
  std::vector<double> loss_trace;  ///< pre-step loss of every update
};

/// Trains the shift classifier over a fixed alignment. `stable` are the
/// landmark rows (negatives), `unstable` the rest (positive pool).
S4DResult s4d_train(const AlignedPair& aligned, std::span<const std::size_t> stable,
                    std::span<const std::size_t> unstable, const S4Params& params);

/// Convenience overload: stable = landmarks of the pair's transform, unstable =
/// everything else.
S4DResult s4d_train(const AlignedPair& aligned, const S4Params& params);

struct S4AInit {
  enum class Kind { all_landmarks, cosine_split };
  Kind kind = Kind::cosine_split;
  /// Fraction of most cosine-distant words (after global alignment) that
  /// starts out as non-landmarks under cosine_split.
  double q = 0.1;
};

S4AInit parse_s4a_init(std::string_view spec);
std::string to_string(const S4AInit& init);

struct S4AOptions {
  S4AInit init;
  /// Classifier iterations run on the initial partition before the first
  /// landmark refresh.
  int warmup_iterations = 100;
};

struct S4AResult {
  std::vector<std::string> landmarks;
  std::vector<std::string> non_landmarks;
  MlpWeights weights;
  /// Fitted on the final landmark set.
  OrthogonalTransform transform;
  std::vector<double> jaccard_history;
  std::vector<double> loss_trace;

  /// Cumulative running mean of jaccard_history.
  [[nodiscard]] std::vector<double> jaccard_running_mean() const;
};

/// Self-supervised landmark refinement. The input pair need not be aligned.
/// Throws NumericalError when the landmark set becomes empty.
S4AResult s4a(const AlignedPair& pair, const S4Params& params, const S4AOptions& options = {});

/// |x n y| / |x u y|; two empty sets give 1. Inputs need not be sorted.
double jaccard(std::span<const std::string> previous, std::span<const std::string> current);
double jaccard(std::span<const std::size_t> previous, std::span<const std::size_t> current);

std::vector<double> running_mean(std::span<const double> values);

/// {landmarks, non_landmarks, jaccard_history, transform, weights} where the
/// last two are file references.
nlohmann::json to_json(const S4AResult& result, std::string_view transform_ref,
                       std::string_view weights_ref);

}  // namespace semshift
