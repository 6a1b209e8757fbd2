#include "semshift/evaluation.hpp"

#include "semshift/alignment.hpp"
#include "semshift/errors.hpp"
#include "semshift/io.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace semshift {

EvalReport score(std::span<const ShiftPrediction> predictions, const GoldLabels& gold) {
  EvalReport r;
  for (const auto& p : predictions) {
    auto it = gold.find(p.word);
    if (it == gold.end()) {
      ++r.n_skipped;
      continue;
    }
    const bool truth = it->second == 1;
    const bool pred = p.label == 1;
    if (pred && truth) ++r.tp;
    else if (pred && !truth) ++r.fp;
    else if (!pred && truth) ++r.fn;
    else ++r.tn;
  }
  const long total = r.tp + r.fp + r.tn + r.fn;
  if (total == 0) throw DataError("no prediction has a gold label");
  auto ratio = [](long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); };
  r.accuracy = ratio(r.tp + r.tn, total);
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  const double pr = r.precision + r.recall;
  r.f1 = pr == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / pr;
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall},
          {"f1", r.f1},             {"tp", r.tp},               {"fp", r.fp},
          {"tn", r.tn},             {"fn", r.fn},               {"n_skipped", r.n_skipped}};
}

ShiftMetric parse_shift_metric(std::string_view name) {
  if (name == "euclidean") return ShiftMetric::euclidean;
  if (name == "cosine") return ShiftMetric::cosine;
  throw UsageError("unknown shift metric '" + std::string(name) + "' (expected euclidean or cosine)");
}

RankedShiftList rank_shifts(const AlignedPair& aligned, ShiftMetric metric, std::string method) {
  if (!aligned.is_aligned()) throw UsageError("ranking shifts requires an aligned pair");
  RankedShiftList list;
  list.method = std::move(method);
  list.entries.reserve(aligned.size());
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    const auto s = shift_magnitude(aligned, i);
    list.entries.emplace_back(aligned.words[i], metric == ShiftMetric::euclidean ? s.euclidean : s.cosine);
  }
  std::sort(list.entries.begin(), list.entries.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return list;
}

namespace {

/// 1-based ranks in descending score order, ties share their average rank.
std::vector<double> average_ranks_desc(const std::vector<double>& scores) {
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> ranks(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::vector<RhoPoint> spearman_topk(const RankedShiftList& x, const RankedShiftList& y,
                                    std::span<const int> ks, TopKMode mode) {
  std::unordered_map<std::string, double> score_x;
  std::unordered_map<std::string, double> score_y;
  for (const auto& [w, s] : x.entries) score_x.emplace(w, s);
  for (const auto& [w, s] : y.entries) score_y.emplace(w, s);
  if (score_x.size() != score_y.size())
    throw DataError("ranked lists cover different word sets");
  for (const auto& [w, s] : score_x)
    if (!score_y.count(w)) throw DataError("word '" + w + "' missing from the second ranking");

  std::vector<RhoPoint> curve;
  for (int k : ks) {
    if (k < 2) throw UsageError("top-k Spearman needs k >= 2");
    if (static_cast<std::size_t>(k) > x.size())
      throw UsageError("k = " + std::to_string(k) + " exceeds the vocabulary size");
    std::vector<std::string> chosen;
    for (int i = 0; i < k; ++i) chosen.push_back(x.entries[static_cast<std::size_t>(i)].first);
    if (mode == TopKMode::union_) {
      std::set<std::string> seen(chosen.begin(), chosen.end());
      for (int i = 0; i < k; ++i) {
        const auto& w = y.entries[static_cast<std::size_t>(i)].first;
        if (seen.insert(w).second) chosen.push_back(w);
      }
    }
    std::vector<double> sx;
    std::vector<double> sy;
    for (const auto& w : chosen) {
      sx.push_back(score_x.at(w));
      sy.push_back(score_y.at(w));
    }
    const auto rx = average_ranks_desc(sx);
    const auto ry = average_ranks_desc(sy);
    double sum_d2 = 0.0;
    for (std::size_t i = 0; i < chosen.size(); ++i) sum_d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    const double m = static_cast<double>(chosen.size());
    curve.push_back({k, 1.0 - 6.0 * sum_d2 / (m * (m * m - 1.0))});
  }
  return curve;
}

std::vector<int> default_topk_grid(std::size_t n) {
  std::vector<int> ks;
  for (int k = 10; k <= 500 && static_cast<std::size_t>(k) <= n; k += 10) ks.push_back(k);
  return ks;
}

UniqueWords unique_words(const RankedShiftList& x, const RankedShiftList& y, std::size_t k) {
  if (k > x.size() || k > y.size()) throw UsageError("k exceeds the ranked list length");
  std::set<std::string> top_x;
  std::set<std::string> top_y;
  for (std::size_t i = 0; i < k; ++i) {
    top_x.insert(x.entries[i].first);
    top_y.insert(y.entries[i].first);
  }
  UniqueWords out;
  std::set_difference(top_x.begin(), top_x.end(), top_y.begin(), top_y.end(), std::back_inserter(out.only_x));
  std::set_difference(top_y.begin(), top_y.end(), top_x.begin(), top_x.end(), std::back_inserter(out.only_y));
  std::set_intersection(top_x.begin(), top_x.end(), top_y.begin(), top_y.end(), std::back_inserter(out.common));
  return out;
}

std::string format_ranked_tsv(const RankedShiftList& list) {
  std::string out;
  for (const auto& [w, s] : list.entries) out += w + '\t' + format_real(s) + '\n';
  return out;
}

std::string format_rho_tsv(std::span<const RhoPoint> curve) {
  std::string out = "k\trho\n";
  for (const auto& p : curve) out += std::to_string(p.k) + '\t' + format_real(p.rho) + '\n';
  return out;
}

std::string format_unique_tsv(const UniqueWords& diff, std::string_view x_name,
                              std::string_view y_name) {
  std::string out = "only_" + std::string(x_name) + "\tonly_" + std::string(y_name) + "\tcommon\n";
  const auto rows = std::max({diff.only_x.size(), diff.only_y.size(), diff.common.size()});
  auto cell = [](const std::vector<std::string>& v, std::size_t i) { return i < v.size() ? v[i] : std::string(); };
  for (std::size_t i = 0; i < rows; ++i)
    out += cell(diff.only_x, i) + '\t' + cell(diff.only_y, i) + '\t' + cell(diff.common, i) + '\n';
  return out;
}

}  // namespace semshift
