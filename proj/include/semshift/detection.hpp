#pragma once

#include "semshift/classifier.hpp"
#include "semshift/embedding_store.hpp"
#include "semshift/pipeline.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace semshift {

struct ShiftPrediction {
  std::string word;
  /// Cosine distance, CDF value or classifier probability, depending on method.
  double score = 0.0;
  int label = 0;
  std::string method;
};

struct DetectionResult {
  std::vector<ShiftPrediction> predictions;  ///< input order
  std::vector<std::string> skipped;          ///< requested but not scorable
};

/// Aligned rows for a list of targets. In pair mode each target names a
/// source word and a reference word ("wordA/wordB").
struct TargetRows {
  std::vector<std::string> names;
  Matrix a;
  Matrix b;
  std::vector<std::string> skipped;
};

/// Rows of the aligned pair for `words`; unknown words are skipped.
TargetRows gather_targets(const AlignedPair& aligned, std::span<const std::string> words);

/// Rows A(wordA) Q and B(wordB) taken from the full (already normalized)
/// tables, so targets outside the common vocabulary can still be scored.
TargetRows gather_target_pairs(const EmbeddingTable& ea, const EmbeddingTable& eb,
                               const OrthogonalTransform& transform,
                               std::span<const std::pair<std::string, std::string>> pairs);

/// Label 1 iff cosine distance > threshold.
DetectionResult classify_cosine(const TargetRows& targets, double threshold);
DetectionResult classify_cosine(const AlignedPair& aligned, std::span<const std::string> words,
                                double threshold);

/// Fraction of `all_distances` strictly below x.
double empirical_cdf_value(std::span<const double> all_distances, double x);

/// Sorted-copy form of empirical_cdf_value for repeated queries.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> values);
  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

struct CalibrationSample {
  double cdf_value = 0.0;
  int label = 0;
};

/// Candidate thresholds 0.1, 0.2, ..., 0.9.
std::vector<double> threshold_grid();

/// Leave-one-out accuracy of the rule (cdf > t => 1) for every grid t; returns
/// the best t, smallest on ties. Throws DataError on fewer than two samples or
/// a single class.
double select_threshold_loocv(std::span<const CalibrationSample> samples);

/// Self-supervised calibration set: a perturbation batch scored by the cosine
/// distance between its A and B' halves, mapped through the CDF of the
/// common-vocabulary distances.
std::vector<CalibrationSample> calibration_samples(const AlignedPair& aligned,
                                                   std::span<const std::size_t> stable,
                                                   std::span<const std::size_t> unstable,
                                                   const BatchSizes& sizes, Rng& rng);

/// Score = CDF of the target's distance over all common-vocabulary distances;
/// label 1 iff score > t.
DetectionResult classify_cdf(const AlignedPair& aligned, const TargetRows& targets, double t);
DetectionResult classify_cdf(const AlignedPair& aligned, std::span<const std::string> words,
                             double t);

/// Score = classifier probability; label from predict() at 0.5.
DetectionResult classify_s4d(const MlpWeights& weights, const TargetRows& targets);
DetectionResult classify_s4d(const MlpWeights& weights, const AlignedPair& aligned,
                             std::span<const std::string> words);

/// "word<TAB>score<TAB>label<TAB>method" lines, no header.
std::string format_predictions_tsv(const DetectionResult& result);

}  // namespace semshift
