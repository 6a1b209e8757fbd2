#pragma once

#include "semshift/detection.hpp"
#include "semshift/embedding_store.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace semshift {

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;
  long n_skipped = 0;
};

using GoldLabels = std::unordered_map<std::string, int>;

/// Binary metrics over predictions with a gold label; 0/0 ratios are 0.
/// Throws DataError when no prediction has a gold label.
EvalReport score(std::span<const ShiftPrediction> predictions, const GoldLabels& gold);

nlohmann::json to_json(const EvalReport& report);

enum class ShiftMetric { euclidean, cosine };
ShiftMetric parse_shift_metric(std::string_view name);

/// Words in descending score order, ties broken lexicographically.
struct RankedShiftList {
  std::vector<std::pair<std::string, double>> entries;
  std::string method;

  [[nodiscard]] std::size_t size() const { return entries.size(); }
};

RankedShiftList rank_shifts(const AlignedPair& aligned, ShiftMetric metric,
                            std::string method = {});

enum class TopKMode {
  first,  ///< top-k words of the first list
  union_  ///< union of both top-k sets
};

struct RhoPoint {
  int k = 0;
  double rho = 0.0;
};

/// Spearman's rho over the top-k words for every k. The chosen words are
/// re-ranked by their score in each list (average ranks on ties) and
/// rho = 1 - 6 sum d^2 / (m (m^2 - 1)).
std::vector<RhoPoint> spearman_topk(const RankedShiftList& x, const RankedShiftList& y,
                                    std::span<const int> ks, TopKMode mode = TopKMode::first);

/// 10, 20, ..., up to min(500, n).
std::vector<int> default_topk_grid(std::size_t n);

struct UniqueWords {
  std::vector<std::string> only_x;
  std::vector<std::string> only_y;
  std::vector<std::string> common;
};

UniqueWords unique_words(const RankedShiftList& x, const RankedShiftList& y, std::size_t k);

std::string format_ranked_tsv(const RankedShiftList& list);
std::string format_rho_tsv(std::span<const RhoPoint> curve);
/// Three columns (only_x, only_y, common), padded with empty cells.
std::string format_unique_tsv(const UniqueWords& diff, std::string_view x_name,
                              std::string_view y_name);

}  // namespace semshift
