#pragma once

#include "semshift/embedding_store.hpp"
#include "semshift/evaluation.hpp"

#include <cstdint>

namespace semshift {

/// Planted-shift benchmark parameters.
struct SyntheticSpec {
  int vocab_size = 2000;
  int dimension = 50;
  double shift_fraction = 0.1;
  double shift_strength = 0.6;
  double noise_sigma = 0.05;
  enum class Rotation { none, random_orthogonal } rotation = Rotation::random_orthogonal;
  std::uint64_t seed = kDefaultSeed;

  void validate() const;
  [[nodiscard]] int planted_count() const;
};

struct SyntheticPair {
  EmbeddingTable a;
  EmbeddingTable b;
  AlignedPair pair;  ///< intersect(a, b), unaligned
  GoldLabels gold;   ///< 1 for planted words
  Matrix rotation;   ///< the planted map from A to B
};

/// A: unit rows of i.i.d. normals. B = A R + sigma * noise. Planted words get
/// B(w) += s * B(t) for a random other word t, then are rescaled to their
/// previous norm. Words are named w000000, w000001, ...
SyntheticPair generate_synthetic_pair(const SyntheticSpec& spec);

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
Matrix random_orthogonal(Eigen::Index d, Rng& rng);

std::string format_gold_tsv(const GoldLabels& gold);

}  // namespace semshift
