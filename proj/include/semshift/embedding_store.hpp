#pragma once

#include "semshift/orthogonal_transform.hpp"
#include "semshift/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semshift {

/// Vocabulary plus one dense row per word. Immutable after construction.
///
/// Invariants checked on construction: one row per word, no duplicate words,
/// d >= 1, all entries finite. Frequency ranks are optional (1 = most
/// frequent).
class EmbeddingTable {
 public:
  EmbeddingTable(std::vector<std::string> words, Matrix matrix,
                 std::unordered_map<std::string, std::int64_t> freq_rank = {});

  [[nodiscard]] const std::vector<std::string>& words() const { return words_; }
  [[nodiscard]] const Matrix& matrix() const { return matrix_; }
  [[nodiscard]] Eigen::Index size() const { return matrix_.rows(); }
  [[nodiscard]] Eigen::Index dimension() const { return matrix_.cols(); }

  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view word) const;
  [[nodiscard]] bool contains(std::string_view word) const { return index_of(word).has_value(); }

  [[nodiscard]] const std::unordered_map<std::string, std::int64_t>& freq_rank() const {
    return freq_rank_;
  }
  [[nodiscard]] std::optional<std::int64_t> rank_of(const std::string& word) const;

  /// Copy with the matrix replaced (same vocabulary and ranks).
  [[nodiscard]] EmbeddingTable with_matrix(Matrix matrix) const;
  /// Copy with frequency ranks derived from raw counts: descending count,
  /// ties broken lexicographically. Words without a count get no rank.
  [[nodiscard]] EmbeddingTable with_frequency_counts(
      const std::unordered_map<std::string, double>& counts) const;

 private:
  std::vector<std::string> words_;
  Matrix matrix_;
  std::unordered_map<std::string, std::int64_t> freq_rank_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Common-vocabulary view of two spaces sharing row indexing.
///
/// `a` is the source space (possibly already mapped by `transform`), `b` the
/// reference space. `words` is the lexicographically sorted intersection.
/// `freq_rank[i]` is the rank of `words[i]`, 0 when unknown; the vector is
/// empty when no frequency information was available at all.
struct AlignedPair {
  std::vector<std::string> words;
  Matrix a;
  Matrix b;
  std::vector<std::int64_t> freq_rank;
  std::optional<OrthogonalTransform> transform;

  [[nodiscard]] std::size_t size() const { return words.size(); }
  [[nodiscard]] Eigen::Index dimension() const { return a.cols(); }
  [[nodiscard]] bool is_aligned() const { return transform.has_value(); }

  /// Binary search over the sorted vocabulary.
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view word) const;
  /// Throws DataError listing every word not in the vocabulary.
  [[nodiscard]] std::vector<std::size_t> indices_of(std::span<const std::string> words) const;
  [[nodiscard]] std::vector<std::string> words_at(std::span<const std::size_t> indices) const;
};

enum class Normalization { none, l2, center_l2 };

Normalization parse_normalization(std::string_view name);
std::string_view to_string(Normalization mode);

/// Reads the word2vec text format, with or without the "<N> <d>" header line.
/// Frequency ranks follow file order.
EmbeddingTable load_word2vec_text(const std::filesystem::path& path);
EmbeddingTable parse_word2vec_text(std::string_view text);
/// Writes the header form with 9 significant digits per value.
std::string format_word2vec_text(const EmbeddingTable& table);
void save_word2vec_text(const EmbeddingTable& table, const std::filesystem::path& path);

/// "word<TAB>count" per line.
std::unordered_map<std::string, double> load_frequency_file(const std::filesystem::path& path);

/// Rows of `ea` and `eb` for the sorted common vocabulary. Frequency ranks
/// come from `ea`.
AlignedPair intersect(const EmbeddingTable& ea, const EmbeddingTable& eb);

/// `labels` names the rows in error messages; may be empty.
Matrix normalize_rows(const Matrix& m, Normalization mode,
                      std::span<const std::string> labels = {});
EmbeddingTable normalize_rows(const EmbeddingTable& table, Normalization mode);
/// Normalizes both spaces of the pair independently.
AlignedPair normalize_rows(const AlignedPair& pair, Normalization mode);

/// 1 - u.v / (|u| |v|), clamped to [0, 2].
double cosine_distance(const Eigen::Ref<const RowVector>& u, const Eigen::Ref<const RowVector>& v);

}  // namespace semshift
