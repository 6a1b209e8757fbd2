#include "semshift/detection.hpp"

#include "semshift/alignment.hpp"
#include "semshift/errors.hpp"
#include "semshift/io.hpp"

#include <algorithm>
#include <cmath>

namespace semshift {

TargetRows gather_targets(const AlignedPair& aligned, std::span<const std::string> words) {
  TargetRows rows;
  std::vector<Eigen::Index> found;
  for (const auto& w : words) {
    if (auto i = aligned.index_of(w)) {
      rows.names.push_back(w);
      found.push_back(static_cast<Eigen::Index>(*i));
    } else {
      rows.skipped.push_back(w);
    }
  }
  const auto n = static_cast<Eigen::Index>(found.size());
  rows.a.resize(n, aligned.dimension());
  rows.b.resize(n, aligned.dimension());
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.a.row(i) = aligned.a.row(found[static_cast<std::size_t>(i)]);
    rows.b.row(i) = aligned.b.row(found[static_cast<std::size_t>(i)]);
  }
  return rows;
}

TargetRows gather_target_pairs(const EmbeddingTable& ea, const EmbeddingTable& eb,
                               const OrthogonalTransform& transform,
                               std::span<const std::pair<std::string, std::string>> pairs) {
  if (ea.dimension() != transform.dimension() || eb.dimension() != transform.dimension())
    throw DataError("transform dimension does not match the embedding tables");
  TargetRows rows;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> found;
  for (const auto& [wa, wb] : pairs) {
    auto name = wa + "/" + wb;
    auto ia = ea.index_of(wa);
    auto ib = eb.index_of(wb);
    if (ia && ib) {
      rows.names.push_back(std::move(name));
      found.emplace_back(static_cast<Eigen::Index>(*ia), static_cast<Eigen::Index>(*ib));
    } else {
      rows.skipped.push_back(std::move(name));
    }
  }
  const auto n = static_cast<Eigen::Index>(found.size());
  rows.a.resize(n, ea.dimension());
  rows.b.resize(n, eb.dimension());
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.a.row(i) = ea.matrix().row(found[static_cast<std::size_t>(i)].first) * transform.q;
    rows.b.row(i) = eb.matrix().row(found[static_cast<std::size_t>(i)].second);
  }
  return rows;
}

namespace {

std::string method_name(std::string_view prefix, double value) {
  return std::string(prefix) + ":" + format_real(value);
}

}  // namespace

DetectionResult classify_cosine(const TargetRows& targets, double threshold) {
  DetectionResult result;
  result.skipped = targets.skipped;
  const auto method = method_name("cos", threshold);
  for (Eigen::Index i = 0; i < targets.a.rows(); ++i) {
    const double d = cosine_distance(targets.a.row(i), targets.b.row(i));
    result.predictions.push_back(
        {targets.names[static_cast<std::size_t>(i)], d, d > threshold ? 1 : 0, method});
  }
  return result;
}

DetectionResult classify_cosine(const AlignedPair& aligned, std::span<const std::string> words,
                                double threshold) {
  if (!aligned.is_aligned()) throw UsageError("cosine detector requires an aligned pair");
  return classify_cosine(gather_targets(aligned, words), threshold);
}

double empirical_cdf_value(std::span<const double> all_distances, double x) {
  if (all_distances.empty()) throw DataError("empirical CDF of an empty sample");
  const auto below = std::count_if(all_distances.begin(), all_distances.end(),
                                   [x](double v) { return v < x; });
  return static_cast<double>(below) / static_cast<double>(all_distances.size());
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) throw DataError("empirical CDF of an empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto below = std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
  return static_cast<double>(below) / static_cast<double>(sorted_.size());
}

std::vector<double> threshold_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 9; ++k) grid.push_back(k / 10.0);
  return grid;
}

double select_threshold_loocv(std::span<const CalibrationSample> samples) {
  if (samples.size() < 2) throw DataError("threshold selection needs at least two samples");
  const auto positives = std::count_if(samples.begin(), samples.end(),
                                       [](const CalibrationSample& s) { return s.label == 1; });
  if (positives == 0 || positives == static_cast<long>(samples.size()))
    throw DataError("threshold selection needs both labels");

  // The rule has no fitted state, so the held-out prediction for a sample is
  // the rule applied to that sample; LOO accuracy reduces to counting.
  std::vector<double> pos;
  std::vector<double> neg;
  for (const auto& s : samples) (s.label == 1 ? pos : neg).push_back(s.cdf_value);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  double best_t = 0.0;
  long best_correct = -1;
  for (double t : threshold_grid()) {
    const auto pos_above = pos.end() - std::upper_bound(pos.begin(), pos.end(), t);
    const auto neg_at_or_below = std::upper_bound(neg.begin(), neg.end(), t) - neg.begin();
    const long correct = static_cast<long>(pos_above + neg_at_or_below);
    if (correct > best_correct) {
      best_correct = correct;
      best_t = t;
    }
  }
  return best_t;
}

std::vector<CalibrationSample> calibration_samples(const AlignedPair& aligned,
                                                   std::span<const std::size_t> stable,
                                                   std::span<const std::size_t> unstable,
                                                   const BatchSizes& sizes, Rng& rng) {
  if (!aligned.is_aligned()) throw UsageError("calibration requires an aligned pair");
  const EmpiricalCdf cdf(cosine_distances(aligned));
  const auto batch = make_batch(aligned, stable, unstable, sizes, rng);
  const auto d = aligned.dimension();
  std::vector<CalibrationSample> out;
  out.reserve(static_cast<std::size_t>(batch.rows()));
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    const double dist = cosine_distance(batch.features.row(i).head(d), batch.features.row(i).tail(d));
    out.push_back({cdf(dist), static_cast<int>(batch.labels[i])});
  }
  return out;
}

DetectionResult classify_cdf(const AlignedPair& aligned, const TargetRows& targets, double t) {
  if (!aligned.is_aligned()) throw UsageError("CDF detector requires an aligned pair");
  const EmpiricalCdf cdf(cosine_distances(aligned));
  DetectionResult result;
  result.skipped = targets.skipped;
  const auto method = method_name("cdf", t);
  for (Eigen::Index i = 0; i < targets.a.rows(); ++i) {
    const double p = cdf(cosine_distance(targets.a.row(i), targets.b.row(i)));
    result.predictions.push_back({targets.names[static_cast<std::size_t>(i)], p, p > t ? 1 : 0, method});
  }
  return result;
}

DetectionResult classify_cdf(const AlignedPair& aligned, std::span<const std::string> words,
                             double t) {
  return classify_cdf(aligned, gather_targets(aligned, words), t);
}

DetectionResult classify_s4d(const MlpWeights& weights, const TargetRows& targets) {
  DetectionResult result;
  result.skipped = targets.skipped;
  for (Eigen::Index i = 0; i < targets.a.rows(); ++i) {
    const auto p = predict(weights, targets.a.row(i), targets.b.row(i));
    result.predictions.push_back({targets.names[static_cast<std::size_t>(i)], p.probability, p.label, "s4d"});
  }
  return result;
}

DetectionResult classify_s4d(const MlpWeights& weights, const AlignedPair& aligned,
                             std::span<const std::string> words) {
  return classify_s4d(weights, gather_targets(aligned, words));
}

std::string format_predictions_tsv(const DetectionResult& result) {
  std::string out;
  for (const auto& p : result.predictions) {
    out += p.word + '\t' + format_real(p.score) + '\t' + std::to_string(p.label) + '\t' + p.method + '\n';
  }
  return out;
}

}  // namespace semshift
