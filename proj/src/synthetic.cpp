#include "semshift/synthetic.hpp"

#include "semshift/errors.hpp"
#include "semshift/io.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace semshift {

void SyntheticSpec::validate() const {
  if (vocab_size < 2) throw UsageError("synthetic vocabulary needs at least two words");
  if (dimension < 1) throw UsageError("synthetic dimension must be positive");
  if (!(shift_fraction >= 0.0 && shift_fraction < 1.0))
    throw UsageError("shift fraction must lie in [0, 1)");
  if (!(shift_strength > 0.0) || !std::isfinite(shift_strength))
    throw UsageError("shift strength must be positive");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw UsageError("noise sigma must be non-negative");
  if (shift_fraction > 0.0 && planted_count() >= vocab_size)
    throw UsageError("shift fraction leaves no stable words");
}

int SyntheticSpec::planted_count() const {
  return static_cast<int>(std::ceil(shift_fraction * vocab_size - 1e-9));
}

Matrix random_orthogonal(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

SyntheticPair generate_synthetic_pair(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal;
  const Eigen::Index n = spec.vocab_size;
  const Eigen::Index d = spec.dimension;

  Matrix a(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = normal(rng);
    const double norm = a.row(i).norm();
    if (norm == 0.0) a(i, 0) = 1.0;
    else a.row(i) /= norm;
  }

  Matrix rotation = spec.rotation == SyntheticSpec::Rotation::random_orthogonal
                        ? random_orthogonal(d, rng)
                        : Matrix(Matrix::Identity(d, d));
  Matrix b = a * rotation;
  if (spec.noise_sigma > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) b(i, j) += spec.noise_sigma * normal(rng);
  }

  std::vector<std::size_t> indices(static_cast<std::size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);
  std::shuffle(indices.begin(), indices.end(), rng);
  const auto planted = static_cast<std::size_t>(spec.shift_fraction > 0.0 ? spec.planted_count() : 0);
  std::vector<char> is_planted(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < planted; ++i) is_planted[indices[i]] = 1;

  // Targets are read from the pre-planting rows so the result does not depend
  // on the planting order.
  const Matrix b_clean = b;
  std::uniform_int_distribution<Eigen::Index> pick_other(0, n - 2);
  for (Eigen::Index w = 0; w < n; ++w) {
    if (!is_planted[static_cast<std::size_t>(w)]) continue;
    Eigen::Index t = pick_other(rng);
    if (t >= w) ++t;
    const double norm_before = b_clean.row(w).norm();
    RowVector moved = b_clean.row(w) + spec.shift_strength * b_clean.row(t);
    const double norm_after = moved.norm();
    if (norm_after > 0.0 && norm_before > 0.0) moved *= norm_before / norm_after;
    b.row(w) = moved;
  }

  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(n));
  GoldLabels gold;
  for (Eigen::Index i = 0; i < n; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "w%06ld", static_cast<long>(i));
    words.emplace_back(name);
    gold.emplace(words.back(), is_planted[static_cast<std::size_t>(i)] ? 1 : 0);
  }
  std::unordered_map<std::string, std::int64_t> ranks;
  for (std::size_t i = 0; i < words.size(); ++i) ranks.emplace(words[i], static_cast<std::int64_t>(i + 1));

  SyntheticPair out{EmbeddingTable(words, std::move(a), ranks), EmbeddingTable(words, std::move(b), ranks),
                    AlignedPair{}, std::move(gold), std::move(rotation)};
  out.pair = intersect(out.a, out.b);
  return out;
}

std::string format_gold_tsv(const GoldLabels& gold) {
  std::map<std::string, int> sorted(gold.begin(), gold.end());
  std::string out;
  for (const auto& [w, label] : sorted) out += w + '\t' + std::to_string(label) + '\n';
  return out;
}

}  // namespace semshift
