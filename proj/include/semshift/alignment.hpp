#pragma once

#include "semshift/embedding_store.hpp"
#include "semshift/orthogonal_transform.hpp"
#include "semshift/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semshift {

/// Orthogonal Q minimizing ||a_sub Q - b_sub||_F, built as U V^T from the SVD
/// of a_sub^T b_sub. Any minimizer is acceptable when singular values repeat.
Matrix orthogonal_procrustes(const Matrix& a_sub, const Matrix& b_sub);

enum class FrequencyEnd { top, bottom };

/// ceil(fraction * N) words with the smallest (top) or largest (bottom)
/// frequency rank; ties broken lexicographically.
std::vector<std::string> select_landmarks_frequency(const AlignedPair& pair, double fraction,
                                                    FrequencyEnd end);

/// Fits Q on the landmark rows and maps A into B's space (B is untouched).
/// If the pair was already aligned the stored transform is the composition,
/// so it always maps the original source rows.
AlignedPair align(const AlignedPair& pair, std::span<const std::string> landmarks);
AlignedPair align(const AlignedPair& pair, std::span<const std::size_t> landmark_rows);

/// Global alignment: every common word is a landmark.
AlignedPair align_global(const AlignedPair& pair);

struct ShiftMagnitude {
  double euclidean = 0.0;
  double cosine = 0.0;
};

ShiftMagnitude shift_magnitude(const AlignedPair& aligned, std::string_view word);
ShiftMagnitude shift_magnitude(const AlignedPair& aligned, std::size_t row);

/// Per-word cosine distance between the rows of A and B, in vocabulary order.
std::vector<double> cosine_distances(const AlignedPair& pair);

}  // namespace semshift
