#pragma once

#include "semshift/embedding_store.hpp"
#include "semshift/types.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace semshift {

/// Pseudo-labeled rows [A(w) | B'(w)]; label 1 rows carry a perturbed B part.
struct PerturbationBatch {
  static constexpr std::size_t kNoTarget = std::numeric_limits<std::size_t>::max();

  Matrix features;                          ///< rows x 2d
  Vector labels;                            ///< 0 stable, 1 shifted
  std::vector<std::size_t> row_words;       ///< word index per row
  std::vector<std::size_t> row_targets;     ///< target t per row, kNoTarget for negatives
  std::vector<std::size_t> positive_words;  ///< S_p in draw order
  std::vector<std::size_t> negative_words;  ///< S_n in draw order

  [[nodiscard]] Eigen::Index rows() const { return features.rows(); }
};

/// B(w) + r B(t) computed on a copy; `b` is not modified.
RowVector perturb(const Matrix& b, std::size_t w, std::size_t t, double r);

struct BatchSizes {
  int n_pos = 1000;
  int n_neg = 1000;
  double r = 0.25;
};

/// One self-supervised batch. Negatives are drawn uniformly (with replacement)
/// from `stable`, positives and their targets from `unstable`; when
/// `unstable` has fewer than two words both are drawn from the whole
/// vocabulary instead. Targets are redrawn until t != w. Rows are shuffled.
PerturbationBatch make_batch(const AlignedPair& pair, std::span<const std::size_t> stable,
                             std::span<const std::size_t> unstable, const BatchSizes& sizes,
                             Rng& rng);

/// Validates r in (0, 2]; returns true when r > 1 (outside the range the
/// perturbation rule was motivated for) so callers can warn.
bool check_perturbation_rate(double r);

}  // namespace semshift
