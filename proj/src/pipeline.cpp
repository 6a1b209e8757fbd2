#include "semshift/pipeline.hpp"

#include "semshift/alignment.hpp"
#include "semshift/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

namespace semshift {

void S4Params::validate(bool allow_zero_iterations) const {
  if (n_pos < 1 || n_neg < 1) throw UsageError("n_pos and n_neg must be positive");
  check_perturbation_rate(r);
  if (iterations < 0 || (!allow_zero_iterations && iterations == 0))
    throw UsageError("iteration count must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw UsageError("learning rate must be positive");
  if (inner_epochs < 1) throw UsageError("inner_epochs must be at least 1");
  if (hidden < 1) throw UsageError("hidden width must be at least 1");
}

S4Params s4_preset(std::string_view name) {
  S4Params p;
  if (name == "s4d" || name == "default") return p;
  // S4-A language profiles: n positives, m negatives, r, 100 iterations.
  if (name == "english") {
    p.n_pos = 100, p.n_neg = 50, p.r = 1.0;
  } else if (name == "german") {
    p.n_pos = 100, p.n_neg = 200, p.r = 1.0;
  } else if (name == "latin") {
    p.n_pos = 10, p.n_neg = 4, p.r = 0.5;
  } else if (name == "swedish") {
    p.n_pos = 100, p.n_neg = 200, p.r = 1.0;
  } else {
    throw UsageError("unknown parameter profile '" + std::string(name) + "'");
  }
  p.iterations = 100;
  return p;
}

std::vector<std::string> s4_preset_names() {
  return {"s4d", "english", "german", "latin", "swedish"};
}

namespace {

std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> subset) {
  std::vector<char> in(n, 0);
  for (auto i : subset) in.at(i) = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

void train_on_batch(Optimizer& opt, MlpWeights& w, const PerturbationBatch& batch, int epochs,
                    std::vector<double>& trace) {
  for (int e = 0; e < epochs; ++e) trace.push_back(opt.step(w, batch));
}

/// Probabilities for every common word.
Vector predict_all(const MlpWeights& w, const AlignedPair& aligned) {
  Matrix x(static_cast<Eigen::Index>(aligned.size()), 2 * aligned.dimension());
  x.leftCols(aligned.dimension()) = aligned.a;
  x.rightCols(aligned.dimension()) = aligned.b;
  return forward_batch(w, x);
}

}  // namespace

S4DResult s4d_train(const AlignedPair& aligned, std::span<const std::size_t> stable,
                    std::span<const std::size_t> unstable, const S4Params& params) {
  params.validate();
  if (!aligned.is_aligned())
    throw UsageError("S4-D trains over a fixed alignment; align the pair first");
  Rng rng(params.seed);
  S4DResult result;
  result.weights = init_weights(static_cast<int>(aligned.dimension()), params.hidden, rng);
  Optimizer opt(params.optimizer, params.lr);
  for (int k = 0; k < params.iterations; ++k) {
    auto batch = make_batch(aligned, stable, unstable, params.batch_sizes(), rng);
    train_on_batch(opt, result.weights, batch, params.inner_epochs, result.loss_trace);
  }
  return result;
}

S4DResult s4d_train(const AlignedPair& aligned, const S4Params& params) {
  if (!aligned.is_aligned())
    throw UsageError("S4-D trains over a fixed alignment; align the pair first");
  auto stable = aligned.indices_of(aligned.transform->landmarks);
  std::sort(stable.begin(), stable.end());
  auto unstable = complement(aligned.size(), stable);
  return s4d_train(aligned, stable, unstable, params);
}

S4AInit parse_s4a_init(std::string_view spec) {
  S4AInit init;
  if (spec == "all" || spec == "all_landmarks") {
    init.kind = S4AInit::Kind::all_landmarks;
    return init;
  }
  constexpr std::string_view prefix = "cosine_split";
  if (spec.substr(0, prefix.size()) == prefix) {
    init.kind = S4AInit::Kind::cosine_split;
    auto rest = spec.substr(prefix.size());
    if (rest.empty()) return init;
    if (rest.front() == ':') {
      rest.remove_prefix(1);
      double q = 0.0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), q);
      if (ec == std::errc() && ptr == rest.data() + rest.size() && q > 0.0 && q < 1.0) {
        init.q = q;
        return init;
      }
    }
  }
  throw UsageError("unknown S4-A init '" + std::string(spec) +
                   "' (expected all_landmarks or cosine_split[:q] with q in (0,1))");
}

std::string to_string(const S4AInit& init) {
  if (init.kind == S4AInit::Kind::all_landmarks) return "all_landmarks";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "cosine_split:%.9g", init.q);
  return buf;
}

std::vector<double> S4AResult::jaccard_running_mean() const {
  return running_mean(jaccard_history);
}

S4AResult s4a(const AlignedPair& pair, const S4Params& params, const S4AOptions& options) {
  params.validate(false);
  if (options.warmup_iterations < 0) throw UsageError("warm-up iterations must be non-negative");
  const std::size_t n = pair.size();

  // Unaligned source; every iteration re-fits Q from scratch on the current
  // landmark set.
  AlignedPair source = pair;
  source.transform.reset();
  if (pair.transform) source.a = pair.a * pair.transform->q.transpose();

  std::vector<char> unstable_mask(n, 0);
  if (options.init.kind == S4AInit::Kind::cosine_split) {
    if (!(options.init.q > 0.0 && options.init.q < 1.0))
      throw UsageError("cosine_split fraction must lie in (0, 1)");
    const auto global = align_global(source);
    const auto dist = cosine_distances(global);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (dist[x] != dist[y]) return dist[x] > dist[y];
      return x < y;
    });
    auto count = static_cast<std::size_t>(std::ceil(options.init.q * static_cast<double>(n) - 1e-9));
    count = std::min(count, n - 1);
    for (std::size_t i = 0; i < count; ++i) unstable_mask[order[i]] = 1;
  }

  auto split = [&](std::vector<std::size_t>& stable, std::vector<std::size_t>& unstable) {
    stable.clear();
    unstable.clear();
    for (std::size_t i = 0; i < n; ++i) (unstable_mask[i] ? unstable : stable).push_back(i);
  };

  Rng rng(params.seed);
  S4AResult result;
  result.weights = init_weights(static_cast<int>(pair.dimension()), params.hidden, rng);
  Optimizer opt(params.optimizer, params.lr);

  std::vector<std::size_t> stable;
  std::vector<std::size_t> unstable;
  split(stable, unstable);

  if (options.warmup_iterations > 0) {
    const auto aligned = align(source, std::span<const std::size_t>(stable));
    for (int k = 0; k < options.warmup_iterations; ++k) {
      auto batch = make_batch(aligned, stable, unstable, params.batch_sizes(), rng);
      train_on_batch(opt, result.weights, batch, params.inner_epochs, result.loss_trace);
    }
  }

  for (int k = 0; k < params.iterations; ++k) {
    const auto aligned = align(source, std::span<const std::size_t>(stable));
    auto batch = make_batch(aligned, stable, unstable, params.batch_sizes(), rng);
    train_on_batch(opt, result.weights, batch, params.inner_epochs, result.loss_trace);

    const Vector prob = predict_all(result.weights, aligned);
    for (std::size_t i = 0; i < n; ++i)
      unstable_mask[i] = prob[static_cast<Eigen::Index>(i)] > 0.5 ? 1 : 0;

    std::vector<std::size_t> previous = std::move(stable);
    split(stable, unstable);
    if (stable.empty())
      throw NumericalError("S4-A predicted every word as shifted at iteration " +
                           std::to_string(k + 1) +
                           "; try a larger perturbation rate or a different init");
    result.jaccard_history.push_back(jaccard(previous, stable));
  }

  const auto final_alignment = align(source, std::span<const std::size_t>(stable));
  result.transform = *final_alignment.transform;
  result.landmarks = source.words_at(stable);
  result.non_landmarks = source.words_at(unstable);
  return result;
}

double jaccard(std::span<const std::string> previous, std::span<const std::string> current) {
  std::set<std::string_view> x(previous.begin(), previous.end());
  std::set<std::string_view> y(current.begin(), current.end());
  if (x.empty() && y.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& w : x) inter += y.count(w);
  return static_cast<double>(inter) / static_cast<double>(x.size() + y.size() - inter);
}

double jaccard(std::span<const std::size_t> previous, std::span<const std::size_t> current) {
  std::vector<std::size_t> x(previous.begin(), previous.end());
  std::vector<std::size_t> y(current.begin(), current.end());
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end()), x.end());
  std::sort(y.begin(), y.end());
  y.erase(std::unique(y.begin(), y.end()), y.end());
  if (x.empty() && y.empty()) return 1.0;
  std::vector<std::size_t> inter;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(inter));
  return static_cast<double>(inter.size()) /
         static_cast<double>(x.size() + y.size() - inter.size());
}

std::vector<double> running_mean(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

nlohmann::json to_json(const S4AResult& result, std::string_view transform_ref,
                       std::string_view weights_ref) {
  return {{"landmarks", result.landmarks},
          {"non_landmarks", result.non_landmarks},
          {"jaccard_history", result.jaccard_history},
          {"transform", transform_ref},
          {"weights", weights_ref}};
}

}  // namespace semshift
