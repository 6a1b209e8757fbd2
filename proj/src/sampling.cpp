#include "semshift/sampling.hpp"

#include "semshift/errors.hpp"

#include <algorithm>
#include <numeric>

namespace semshift {

RowVector perturb(const Matrix& b, std::size_t w, std::size_t t, double r) {
  if (w == t) throw UsageError("perturbation target must differ from the word");
  if (!(r > 0.0)) throw UsageError("perturbation rate must be positive");
  const auto rows = static_cast<std::size_t>(b.rows());
  if (w >= rows || t >= rows) throw DataError("perturbation index out of range");
  RowVector out(b.cols());
  const auto wi = static_cast<Eigen::Index>(w);
  const auto ti = static_cast<Eigen::Index>(t);
  for (Eigen::Index j = 0; j < b.cols(); ++j) out[j] = b(wi, j) + r * b(ti, j);
  return out;
}

bool check_perturbation_rate(double r) {
  if (!(r > 0.0 && r <= 2.0)) throw UsageError("perturbation rate r must lie in (0, 2]");
  return r > 1.0;
}

PerturbationBatch make_batch(const AlignedPair& pair, std::span<const std::size_t> stable,
                             std::span<const std::size_t> unstable, const BatchSizes& sizes,
                             Rng& rng) {
  if (sizes.n_pos < 1 || sizes.n_neg < 1)
    throw UsageError("batch needs at least one positive and one negative sample");
  check_perturbation_rate(sizes.r);
  if (stable.empty()) throw DataError("no landmark words to draw negative samples from");

  std::vector<std::size_t> everything;
  if (unstable.size() < 2) {
    if (pair.size() < 2) throw DataError("vocabulary too small to draw perturbation targets");
    everything.resize(pair.size());
    std::iota(everything.begin(), everything.end(), 0);
    unstable = everything;
  }

  const auto d = pair.dimension();
  const auto n_neg = static_cast<std::size_t>(sizes.n_neg);
  const auto n_pos = static_cast<std::size_t>(sizes.n_pos);
  std::uniform_int_distribution<std::size_t> pick_stable(0, stable.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_unstable(0, unstable.size() - 1);

  PerturbationBatch batch;
  batch.negative_words.reserve(n_neg);
  for (std::size_t i = 0; i < n_neg; ++i) batch.negative_words.push_back(stable[pick_stable(rng)]);
  batch.positive_words.reserve(n_pos);
  for (std::size_t i = 0; i < n_pos; ++i)
    batch.positive_words.push_back(unstable[pick_unstable(rng)]);

  std::vector<std::size_t> targets(n_pos);
  for (std::size_t i = 0; i < n_pos; ++i) {
    std::size_t t;
    do {
      t = unstable[pick_unstable(rng)];
    } while (t == batch.positive_words[i]);
    targets[i] = t;
  }

  const std::size_t total = n_neg + n_pos;
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  batch.features.resize(static_cast<Eigen::Index>(total), 2 * d);
  batch.labels.resize(static_cast<Eigen::Index>(total));
  batch.row_words.resize(total);
  batch.row_targets.resize(total);
  for (std::size_t row = 0; row < total; ++row) {
    const std::size_t src = order[row];
    const auto r = static_cast<Eigen::Index>(row);
    if (src < n_neg) {
      const auto w = batch.negative_words[src];
      batch.features.row(r).head(d) = pair.a.row(static_cast<Eigen::Index>(w));
      batch.features.row(r).tail(d) = pair.b.row(static_cast<Eigen::Index>(w));
      batch.labels[r] = 0.0;
      batch.row_words[row] = w;
      batch.row_targets[row] = PerturbationBatch::kNoTarget;
    } else {
      const auto w = batch.positive_words[src - n_neg];
      const auto t = targets[src - n_neg];
      batch.features.row(r).head(d) = pair.a.row(static_cast<Eigen::Index>(w));
      batch.features.row(r).tail(d) = perturb(pair.b, w, t, sizes.r);
      batch.labels[r] = 1.0;
      batch.row_words[row] = w;
      batch.row_targets[row] = t;
    }
  }
  return batch;
}

}  // namespace semshift
