#include "oracles.hpp"
#include "semshift/errors.hpp"
#include "semshift/evaluation.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace semshift;

namespace {

std::vector<ShiftPrediction> preds(const std::vector<std::string>& words, const std::vector<int>& labels) {
  std::vector<ShiftPrediction> out;
  for (std::size_t i = 0; i < words.size(); ++i) out.push_back({words[i], 0.0, labels[i], "test"});
  return out;
}

RankedShiftList ranked(std::vector<std::pair<std::string, double>> entries) {
  RankedShiftList list;
  list.entries = std::move(entries);
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return list;
}

}  // namespace

TEST_CASE("score examples") {
  std::vector<std::string> w{"a", "b", "c", "d"};
  GoldLabels gold{{"a", 1}, {"b", 0}, {"c", 0}, {"d", 1}};
  auto r = score(preds(w, {1, 1, 0, 0}), gold);
  CHECK(r.accuracy == 0.5);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.tn == 1);
  CHECK(r.fn == 1);

  auto perfect = score(preds(w, {1, 0, 0, 1}), gold);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.f1 == 1.0);

  auto none = score(preds(w, {0, 0, 0, 0}), gold);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  auto extra = score(preds({"a", "zzz"}, {1, 1}), gold);
  CHECK(extra.n_skipped == 1);
  CHECK(extra.tp == 1);

  CHECK_THROWS_AS(score(preds({"q"}, {1}), gold), DataError);
  CHECK(to_json(r).at("f1").get<double>() == 0.5);
}

TEST_CASE("spearman examples") {
  auto x = ranked({{"a", 4}, {"b", 3}, {"c", 2}, {"d", 1}});
  std::vector<int> k4{4};
  CHECK(spearman_topk(x, x, k4).front().rho == doctest::Approx(1.0).epsilon(1e-15));

  auto rev = ranked({{"d", 4}, {"c", 3}, {"b", 2}, {"a", 1}});
  CHECK(spearman_topk(x, rev, k4).front().rho == doctest::Approx(-1.0).epsilon(1e-15));

  auto swap = ranked({{"a", 4}, {"c", 3}, {"b", 2}, {"d", 1}});
  CHECK(spearman_topk(x, swap, k4).front().rho == doctest::Approx(0.8).epsilon(1e-15));

  auto tied = ranked({{"a", 1}, {"b", 1}, {"c", 0}, {"d", 0}});
  CHECK(spearman_topk(tied, tied, k4).front().rho == doctest::Approx(1.0).epsilon(1e-15));

  std::vector<int> bad{1};
  CHECK_THROWS_AS(spearman_topk(x, x, bad), UsageError);
  std::vector<int> big{5};
  CHECK_THROWS_AS(spearman_topk(x, x, big), UsageError);
}

TEST_CASE("spearman matches the closed form on random permutations") {
  Rng rng(61);
  const int n = 40;
  std::vector<std::string> words;
  for (int i = 0; i < n; ++i) words.push_back("w" + std::to_string(10 + i));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<std::string, double>> ex, ey;
    for (int i = 0; i < n; ++i) {
      ex.emplace_back(words[static_cast<std::size_t>(i)], n - i);
      ey.emplace_back(words[static_cast<std::size_t>(i)], n - perm[static_cast<std::size_t>(i)]);
    }
    std::vector<double> rx(n), ry(n);
    for (int i = 0; i < n; ++i) {
      rx[static_cast<std::size_t>(i)] = i + 1;
      ry[static_cast<std::size_t>(i)] = perm[static_cast<std::size_t>(i)] + 1;
    }
    std::vector<int> ks{n};
    auto rho = spearman_topk(ranked(ex), ranked(ey), ks).front().rho;
    CHECK(std::abs(rho - oracle::spearman_closed_form(rx, ry)) < 1e-12);
  }
}

TEST_CASE("default top-k grid") {
  auto g = default_topk_grid(35);
  CHECK(g == std::vector<int>{10, 20, 30});
  CHECK(default_topk_grid(10000).back() == 500);
}

TEST_CASE("unique words") {
  auto x = ranked({{"a", 5}, {"b", 4}, {"c", 3}, {"d", 2}, {"e", 1}});
  auto y = ranked({{"b", 5}, {"c", 4}, {"d", 3}, {"a", 2}, {"e", 1}});
  auto u = unique_words(x, y, 3);
  CHECK(u.only_x == std::vector<std::string>{"a"});
  CHECK(u.only_y == std::vector<std::string>{"d"});
  CHECK(u.common == std::vector<std::string>{"b", "c"});
  auto same = unique_words(x, x, 3);
  CHECK(same.only_x.empty());
  CHECK(same.only_y.empty());
  auto tsv = format_unique_tsv(u, "X", "Y");
  CHECK(tsv.rfind("only_X\tonly_Y\tcommon\n", 0) == 0);
}

TEST_CASE("rank_shifts ordering") {
  AlignedPair p;
  p.words = {"a", "b", "c"};
  p.a = Matrix::Identity(3, 3);
  p.b = Matrix::Identity(3, 3);
  p.transform = OrthogonalTransform{Matrix::Identity(3, 3), p.words, 0.0};
  auto flat = rank_shifts(p, ShiftMetric::cosine);
  CHECK(flat.entries[0].first == "a");
  CHECK(flat.entries[2].first == "c");
  for (const auto& e : flat.entries) CHECK(e.second == 0.0);

  p.b(2, 2) = -1.0;
  auto moved = rank_shifts(p, ShiftMetric::euclidean, "global");
  CHECK(moved.entries[0].first == "c");
  CHECK(moved.entries[0].second == doctest::Approx(2.0));
  CHECK(moved.method == "global");
  CHECK(format_ranked_tsv(moved).find("c\t2") != std::string::npos);

  p.transform = std::nullopt;
  CHECK_THROWS_AS(rank_shifts(p, ShiftMetric::cosine), UsageError);
}

TEST_CASE("rank_shifts does not depend on vocabulary order") {
  Rng rng(4);
  AlignedPair p;
  for (int i = 0; i < 10; ++i) p.words.push_back("w" + std::to_string(i));
  p.a = oracle::random_matrix(10, 3, rng);
  p.b = oracle::random_matrix(10, 3, rng);
  p.transform = OrthogonalTransform{Matrix::Identity(3, 3), {}, 0.0};
  AlignedPair q = p;
  for (int i = 0; i < 5; ++i) {
    std::swap(q.words[static_cast<std::size_t>(i)], q.words[static_cast<std::size_t>(9 - i)]);
    q.a.row(i).swap(q.a.row(9 - i));
    q.b.row(i).swap(q.b.row(9 - i));
  }
  CHECK(rank_shifts(p, ShiftMetric::cosine).entries == rank_shifts(q, ShiftMetric::cosine).entries);
}
