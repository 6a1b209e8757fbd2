// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "../oracles.hpp"
#include "semshift/cli.hpp"
#include "semshift/semshift.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace semshift;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// Fitted transforms and their source rows, collected for the isometry check.
struct FittedMap {
  Matrix source;
  Matrix q;
};
std::vector<FittedMap> fitted;

void criterion_procrustes() {
  const auto start = Clock::now();
  Rng rng(1001);
  std::uniform_int_distribution<int> pick_k(3, 50), pick_d(2, 20);
  double worst_orth = 0.0, worst_recovery = 0.0;
  int beaten = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = pick_k(rng), d = pick_d(rng);
    Matrix a = oracle::random_matrix(k, d, rng);
    Matrix b = oracle::random_matrix(k, d, rng);
    Matrix q = orthogonal_procrustes(a, b);
    worst_orth = std::max(worst_orth, orthogonality_error(q));
    const double residual = (a * q - b).norm();
    for (int i = 0; i < 1000; ++i) {
      Matrix r = oracle::gram_schmidt_orthogonal(d, rng);
      if ((a * r - b).norm() < residual - 1e-12) ++beaten;
    }
    Matrix rot = oracle::gram_schmidt_orthogonal(d, rng);
    Matrix planted = a * rot;
    Matrix qr = orthogonal_procrustes(a, planted);
    worst_orth = std::max(worst_orth, orthogonality_error(qr));
    worst_recovery = std::max(worst_recovery, (a * qr - planted).rowwise().norm().maxCoeff());
    fitted.push_back({a, q});
  }
  const double t = seconds_since(start);
  const bool ok = worst_orth <= 1e-8 && worst_recovery < 1e-6 && beaten == 0 && t < 10.0;
  report(1, ok, "orthogonal Procrustes",
         fmt("max ||Q^T Q - I||_F %.2e, max planted row error %.2e, random rotations beating OP %d, %.2f s",
             worst_orth, worst_recovery, beaten, t));
}

double relative_gap(double x, double y) {
  const double scale = std::max(std::abs(x), std::abs(y));
  return scale < 1e-8 ? std::abs(x - y) : std::abs(x - y) / scale;
}

void criterion_gradients() {
  const auto start = Clock::now();
  Rng rng(2002);
  std::uniform_int_distribution<int> pick_d(1, 4), pick_h(1, 8), pick_n(2, 12);
  std::normal_distribution<double> normal;
  const double eps = 1e-5;
  double worst = 0.0;
  long checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = pick_d(rng), h = pick_h(rng), n = pick_n(rng);
    MlpWeights w = init_weights(d, h, rng);
    for (Eigen::Index j = 0; j < h; ++j) w.b1[j] = 0.1 * normal(rng);
    w.b2 = 0.1 * normal(rng);
    Matrix x = oracle::random_matrix(n, 2 * d, rng);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = i % 2;
    const auto lg = loss_and_gradient(w, x, y);
    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + eps;
      const double up = bce_loss(w, x, y);
      param = saved - eps;
      const double down = bce_loss(w, x, y);
      param = saved;
      worst = std::max(worst, relative_gap((up - down) / (2.0 * eps), analytic));
      ++checked;
    };
    for (Eigen::Index i = 0; i < w.w1.rows(); ++i)
      for (Eigen::Index j = 0; j < w.w1.cols(); ++j) probe(w.w1(i, j), lg.grad.w1(i, j));
    for (Eigen::Index j = 0; j < h; ++j) {
      probe(w.b1[j], lg.grad.b1[j]);
      probe(w.w2[j], lg.grad.w2[j]);
    }
    probe(w.b2, lg.grad.b2);
  }
  const double t = seconds_since(start);
  report(2, worst <= 1e-4 && t < 5.0, "backprop vs central differences",
         fmt("%ld parameters, max relative error %.2e, %.2f s", checked, worst, t));
}

std::uint64_t checksum(const Matrix& m) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(m.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

void criterion_perturbation() {
  Rng rng(3003);
  Matrix b = oracle::random_matrix(200, 30, rng);
  const auto before = checksum(b);
  std::uniform_int_distribution<std::size_t> pick(0, 199);
  std::uniform_real_distribution<double> pick_r(1e-3, 2.0);
  int mismatched = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto w = pick(rng);
    std::size_t t;
    do t = pick(rng);
    while (t == w);
    const double r = pick_r(rng);
    const RowVector got = perturb(b, w, t, r);
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      const double expect = b(static_cast<Eigen::Index>(w), j) + r * b(static_cast<Eigen::Index>(t), j);
      if (std::memcmp(&expect, &got[j], sizeof(double)) != 0) {
        ++mismatched;
        break;
      }
    }
  }
  const bool untouched = checksum(b) == before;
  report(3, mismatched == 0 && untouched, "perturbation exactness",
         fmt("%d of 1000 vectors differ bit-wise, B checksum %s", mismatched,
             untouched ? "unchanged" : "CHANGED"));
}

struct SeedOutcome {
  double f1 = 0.0;
  double jaccard_mean = 0.0;
  double stable_recall = 0.0;
  double gap_s4a = 0.0;
  double gap_global = 0.0;
};

double separation_gap(const AlignedPair& aligned, const GoldLabels& gold) {
  const auto dist = cosine_distances(aligned);
  double shifted = 0.0, stable = 0.0;
  long n_shifted = 0, n_stable = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (gold.at(aligned.words[i])) {
      shifted += dist[i];
      ++n_shifted;
    } else {
      stable += dist[i];
      ++n_stable;
    }
  }
  return shifted / static_cast<double>(n_shifted) - stable / static_cast<double>(n_stable);
}

void criteria_synthetic() {
  double s4a_seconds = 0.0, s4d_seconds = 0.0;
  std::vector<SeedOutcome> outcomes;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    const auto bench = generate_synthetic_pair(spec);
    const auto pair = normalize_rows(bench.pair, Normalization::l2);
    S4Params params;
    params.seed = seed;

    auto start = Clock::now();
    const auto learned = s4a(pair, params);
    s4a_seconds += seconds_since(start);

    AlignedPair aligned = pair;
    aligned.a = pair.a * learned.transform.q;
    aligned.transform = learned.transform;
    fitted.push_back({pair.a, learned.transform.q});

    start = Clock::now();
    const auto stable = aligned.indices_of(learned.landmarks);
    const auto unstable = aligned.indices_of(learned.non_landmarks);
    const auto trained = s4d_train(aligned, stable, unstable, params);
    const auto detected = classify_s4d(trained.weights, aligned, aligned.words);
    s4d_seconds += seconds_since(start);

    SeedOutcome o;
    o.f1 = score(detected.predictions, bench.gold).f1;
    o.jaccard_mean = learned.jaccard_running_mean().back();
    long stable_total = 0, stable_kept = 0;
    for (const auto& [word, label] : bench.gold) {
      if (label) continue;
      ++stable_total;
      if (std::binary_search(learned.landmarks.begin(), learned.landmarks.end(), word)) ++stable_kept;
    }
    o.stable_recall = static_cast<double>(stable_kept) / static_cast<double>(stable_total);
    o.gap_s4a = separation_gap(aligned, bench.gold);
    const auto global = align_global(pair);
    fitted.push_back({pair.a, global.transform->q});
    o.gap_global = separation_gap(global, bench.gold);
    outcomes.push_back(o);
    std::printf("  seed %2llu: F1 %.4f, Jaccard mean %.4f, stable recall %.4f, gap S4-A %.4f vs global %.4f\n",
                static_cast<unsigned long long>(seed), o.f1, o.jaccard_mean, o.stable_recall, o.gap_s4a,
                o.gap_global);
    std::fflush(stdout);
  }

  std::vector<double> f1, jac, recall;
  int wins = 0;
  for (const auto& o : outcomes) {
    f1.push_back(o.f1);
    jac.push_back(o.jaccard_mean);
    recall.push_back(o.stable_recall);
    if (o.gap_s4a >= o.gap_global) ++wins;
  }
  const double med_f1 = oracle::median(f1);
  report(4, med_f1 >= 0.8 && s4d_seconds < 120.0, "synthetic S4-D recovery",
         fmt("median F1 %.4f over 10 seeds, %.1f s", med_f1, s4d_seconds));
  const double med_jac = oracle::median(jac), med_recall = oracle::median(recall);
  report(5, med_jac >= 0.95 && med_recall >= 0.9 && s4a_seconds < 180.0, "S4-A convergence",
         fmt("median cumulative Jaccard %.4f at iteration 100, median stable-word recall %.4f, %.1f s",
             med_jac, med_recall, s4a_seconds));
  report(6, wins >= 8, "separation amplification", fmt("S4-A gap >= global gap in %d of 10 seeds", wins));
}

void criterion_oracles() {
  Rng rng(7007);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick_n(2, 30);
  int loocv_bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = pick_n(rng);
    std::vector<double> cdf;
    std::vector<int> labels;
    std::vector<CalibrationSample> samples;
    for (int i = 0; i < n; ++i) {
      cdf.push_back(u(rng));
      labels.push_back(i < 2 ? i : (u(rng) < 0.5 ? 1 : 0));
      samples.push_back({cdf.back(), labels.back()});
    }
    if (select_threshold_loocv(samples) != oracle::loocv_bruteforce(cdf, labels)) ++loocv_bad;
  }

  double rho_err = 0.0;
  const int n = 30;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    RankedShiftList x, y;
    std::vector<std::pair<std::string, double>> ey;
    std::vector<double> rx, ry;
    for (int i = 0; i < n; ++i) {
      const std::string w = "w" + std::to_string(100 + i);
      x.entries.emplace_back(w, n - i);
      ey.emplace_back(w, n - perm[static_cast<std::size_t>(i)]);
      rx.push_back(i + 1);
      ry.push_back(perm[static_cast<std::size_t>(i)] + 1);
    }
    std::sort(ey.begin(), ey.end(), [](const auto& p, const auto& q) { return p.second > q.second; });
    y.entries = ey;
    const std::vector<int> ks{n};
    const double rho = spearman_topk(x, y, ks).front().rho;
    rho_err = std::max(rho_err, std::abs(rho - oracle::spearman_closed_form(rx, ry)));
  }

  const std::vector<std::string> ja{"a", "b", "c"}, jb{"b", "c", "d"}, none;
  const bool jaccard_ok = jaccard(ja, jb) == 0.5 && jaccard(ja, ja) == 1.0 && jaccard(none, none) == 1.0;
  const std::vector<ShiftPrediction> preds{{"a", 0, 1, ""}, {"b", 0, 1, ""}, {"c", 0, 0, ""}, {"d", 0, 0, ""}};
  const GoldLabels gold{{"a", 1}, {"b", 0}, {"c", 0}, {"d", 1}};
  const auto s = score(preds, gold);
  const bool score_ok = s.accuracy == 0.5 && s.precision == 0.5 && s.recall == 0.5 && s.f1 == 0.5;

  report(7, loocv_bad == 0 && rho_err <= 1e-12 && jaccard_ok && score_ok, "detector oracles",
         fmt("LOOCV mismatches %d/50, max Spearman error %.2e, Jaccard table %s, score table %s", loocv_bad,
             rho_err, jaccard_ok ? "ok" : "wrong", score_ok ? "ok" : "wrong"));
}

bool run_cli(const std::vector<std::string>& args, std::string& error) {
  std::vector<std::string> full{"semshift"};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = cli::run(full, out, err);
  if (code != cli::kExitOk) error = err.str();
  return code == cli::kExitOk;
}

std::vector<std::pair<std::string, std::string>> tree_contents(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file())
      files.emplace_back(fs::relative(entry.path(), root).string(), read_text_file(entry.path()));
  std::sort(files.begin(), files.end());
  return files;
}

void criterion_determinism() {
  const auto start = Clock::now();
  const auto base = fs::temp_directory_path() / "semshift_acceptance_determinism";
  fs::remove_all(base);
  std::string error;
  bool ran = true;
  for (const char* run : {"run1", "run2"}) {
    const auto dir = base / run;
    const auto a = (dir / "data" / "A.txt").string();
    const auto b = (dir / "data" / "B.txt").string();
    const auto gold = (dir / "data" / "gold.tsv").string();
    ran = ran && run_cli({"synth", "--seed", "3", "--out", (dir / "data").string()}, error) &&
          run_cli({"align", "--a", a, "--b", b, "--landmarks", "s4a", "--seed", "3", "--out",
                   (dir / "align").string()},
                  error) &&
          run_cli({"detect", "--a", a, "--b", b, "--landmarks", "s4a", "--detector", "s4d", "--gold", gold,
                   "--seed", "3", "--out", (dir / "detect").string()},
                  error);
  }
  bool same = false;
  std::size_t n_files = 0;
  if (ran) {
    const auto x = tree_contents(base / "run1");
    const auto y = tree_contents(base / "run2");
    // config.txt echoes the output paths, which differ by construction.
    auto strip = [](auto files) {
      std::erase_if(files, [](const auto& f) { return fs::path(f.first).filename() == "config.txt"; });
      return files;
    };
    same = strip(x) == strip(y);
    n_files = strip(x).size();
  }
  fs::remove_all(base);
  report(8, ran && same, "end-to-end determinism",
         ran ? fmt("%zu output files %s, %.1f s", n_files, same ? "byte-identical" : "DIFFER", seconds_since(start))
             : "CLI run failed: " + error);
}

void criterion_isometry() {
  double worst = 0.0;
  Rng rng(9009);
  for (const auto& [source, q] : fitted) {
    const Matrix mapped = source * q;
    std::uniform_int_distribution<Eigen::Index> pick(0, source.rows() - 1);
    for (int i = 0; i < 200; ++i) {
      const auto x = pick(rng), y = pick(rng);
      if (x == y) continue;
      worst = std::max(worst, std::abs(cosine_distance(source.row(x), source.row(y)) -
                                       cosine_distance(mapped.row(x), mapped.row(y))));
    }
  }
  report(9, worst < 1e-8, "alignment isometry",
         fmt("%zu fitted maps, max within-space cosine change %.2e", fitted.size(), worst));
}

}  // namespace

int main() {
  try {
    criterion_procrustes();
    criterion_gradients();
    criterion_perturbation();
    criteria_synthetic();
    criterion_oracles();
    criterion_determinism();
    criterion_isometry();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "PASSED", failures);
  return failures ? 1 : 0;
}
