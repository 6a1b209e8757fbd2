#include "semshift/cli.hpp"

#include "semshift/semshift.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace semshift::cli {

namespace fs = std::filesystem;

namespace {

/// Everything a subcommand needs, populated by CLI11.
struct RunConfig {
  std::string path_a;
  std::string path_b;
  std::string freq_path;
  std::string normalization = "l2";
  std::string landmarks = "global";
  std::string detector = "cos:0.5";
  std::string out_dir;
  std::uint64_t seed = kDefaultSeed;

  std::string profile;
  std::optional<int> n_pos;
  std::optional<int> n_neg;
  std::optional<double> r;
  std::optional<int> iterations;
  std::optional<double> lr;
  std::optional<std::string> optimizer;
  std::optional<int> inner_epochs;
  std::optional<int> hidden;
  std::string s4a_init = "cosine_split:0.1";
  int warmup = 100;

  std::string targets_path;
  std::string pairs_path;
  std::string gold_path;

  std::string metric = "euclidean";
  int k = 50;
  std::string compare;
  std::string compare_transform;
  std::vector<int> ks;
  std::string topk_mode = "first";

  SyntheticSpec synth;
  std::string rotation = "random";

  std::string config_path;
};

S4Params s4_params(const RunConfig& c) {
  S4Params p = c.profile.empty() ? S4Params{} : s4_preset(c.profile);
  if (c.n_pos) p.n_pos = *c.n_pos;
  if (c.n_neg) p.n_neg = *c.n_neg;
  if (c.r) p.r = *c.r;
  if (c.iterations) p.iterations = *c.iterations;
  if (c.lr) p.lr = *c.lr;
  if (c.optimizer) p.optimizer = parse_optimizer(*c.optimizer);
  if (c.inner_epochs) p.inner_epochs = *c.inner_epochs;
  if (c.hidden) p.hidden = *c.hidden;
  p.seed = c.seed;
  return p;
}

S4AOptions s4a_options(const RunConfig& c) {
  S4AOptions o;
  o.init = parse_s4a_init(c.s4a_init);
  o.warmup_iterations = c.warmup;
  return o;
}

/// key=value lines; '#' starts a comment; optional [section] headers ignored.
std::vector<std::string> config_file_args(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::vector<std::string> args;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      if (first == std::string::npos) return std::string();
      const auto last = s.find_last_not_of(" \t\r");
      return s.substr(first, last - first + 1);
    };
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

struct Prepared {
  EmbeddingTable ea;
  EmbeddingTable eb;
  AlignedPair pair;  ///< normalized, unaligned
};

Prepared prepare(const RunConfig& c) {
  const auto mode = parse_normalization(c.normalization);
  auto raw_a = load_word2vec_text(c.path_a);
  auto raw_b = load_word2vec_text(c.path_b);
  if (!c.freq_path.empty()) raw_a = raw_a.with_frequency_counts(load_frequency_file(c.freq_path));
  auto pair = normalize_rows(intersect(raw_a, raw_b), mode);
  return {normalize_rows(raw_a, mode), normalize_rows(raw_b, mode), std::move(pair)};
}

struct LandmarkOutcome {
  AlignedPair aligned;
  std::vector<std::size_t> stable;
  std::vector<std::size_t> unstable;
  std::optional<S4AResult> s4a_result;
};

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& subset) {
  std::vector<char> in(n, 0);
  for (auto i : subset) in[i] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

double parse_fraction(const std::string& s, const std::string& strategy) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("bad fraction in landmark strategy '" + strategy + "'");
}

LandmarkOutcome resolve_landmarks(const AlignedPair& pair, const std::string& strategy,
                                  const RunConfig& c, std::ostream& err) {
  LandmarkOutcome out;
  auto finish = [&](std::vector<std::string> words) {
    out.aligned = align(pair, std::span<const std::string>(words));
    out.stable = pair.indices_of(out.aligned.transform->landmarks);
    out.unstable = complement(pair.size(), out.stable);
  };
  if (strategy == "global") {
    out.aligned = align_global(pair);
    out.stable.resize(pair.size());
    std::iota(out.stable.begin(), out.stable.end(), 0);
  } else if (strategy.rfind("top-freq:", 0) == 0) {
    finish(select_landmarks_frequency(pair, parse_fraction(strategy.substr(9), strategy), FrequencyEnd::top));
  } else if (strategy.rfind("bot-freq:", 0) == 0) {
    finish(select_landmarks_frequency(pair, parse_fraction(strategy.substr(9), strategy), FrequencyEnd::bottom));
  } else if (strategy.rfind("file:", 0) == 0) {
    finish(read_word_list(strategy.substr(5)));
  } else if (strategy == "s4a") {
    const auto params = s4_params(c);
    if (check_perturbation_rate(params.r)) err << "warning: perturbation rate r > 1\n";
    auto result = s4a(pair, params, s4a_options(c));
    finish(result.landmarks);
    out.s4a_result = std::move(result);
  } else {
    throw UsageError("unknown landmark strategy '" + strategy +
                     "' (expected global, top-freq:F, bot-freq:F, file:PATH or s4a)");
  }
  return out;
}

fs::path ensure_out_dir(const RunConfig& c) {
  if (c.out_dir.empty()) throw UsageError("--out is required");
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

/// Every option that was set or has a default, in name order, so a run can
/// be replayed.
void echo_config(const fs::path& dir, const CLI::App& sub) {
  std::map<std::string, std::string> entries;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value = opt->get_default_str();
    for (const auto& v : opt->results()) value = v;
    if (opt->count() == 0 && value.empty()) continue;
    entries[name] = value;
  }
  std::string text;
  for (const auto& [k, v] : entries) text += k + "=" + v + "\n";
  write_file_atomic(dir / "config.txt", text);
}

std::string distances_tsv(const AlignedPair& aligned) {
  std::string out = "word\teuclidean\tcosine\n";
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    const auto s = shift_magnitude(aligned, i);
    out += aligned.words[i] + '\t' + format_real(s.euclidean) + '\t' + format_real(s.cosine) + '\n';
  }
  return out;
}

std::string jaccard_tsv(const S4AResult& result) {
  std::string out = "iteration\tjaccard\trunning_mean\n";
  const auto mean = result.jaccard_running_mean();
  for (std::size_t i = 0; i < result.jaccard_history.size(); ++i)
    out += std::to_string(i + 1) + '\t' + format_real(result.jaccard_history[i]) + '\t' +
           format_real(mean[i]) + '\n';
  return out;
}

void write_s4a_outputs(const fs::path& dir, const S4AResult& result) {
  write_file_atomic(dir / "landmarks.txt", format_word_list(result.landmarks));
  write_file_atomic(dir / "non_landmarks.txt", format_word_list(result.non_landmarks));
  write_file_atomic(dir / "jaccard.tsv", jaccard_tsv(result));
  write_json(dir / "s4a_weights.json", to_json(result.weights));
  write_json(dir / "s4a.json", to_json(result, "transform.json", "s4a_weights.json"));
}

int cmd_align(const RunConfig& c, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const auto dir = ensure_out_dir(c);
  auto prepared = prepare(c);
  auto lm = resolve_landmarks(prepared.pair, c.landmarks, c, err);
  const auto& t = *lm.aligned.transform;
  write_json(dir / "transform.json", to_json(t));
  write_file_atomic(dir / "distances.tsv", distances_tsv(lm.aligned));
  if (lm.s4a_result) write_s4a_outputs(dir, *lm.s4a_result);
  echo_config(dir, sub);
  out << "common words: " << prepared.pair.size() << "\n"
      << "landmarks: " << t.landmarks.size() << " (" << c.landmarks << ")\n"
      << "residual: " << format_real(t.residual) << "\n"
      << "orthogonality error: " << format_real(orthogonality_error(t.q)) << "\n";
  return kExitOk;
}

int cmd_landmarks(const RunConfig& c, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const auto dir = ensure_out_dir(c);
  auto prepared = prepare(c);
  auto lm = resolve_landmarks(prepared.pair, "s4a", c, err);
  const auto& result = *lm.s4a_result;
  write_json(dir / "transform.json", to_json(result.transform));
  write_s4a_outputs(dir, result);
  echo_config(dir, sub);
  const auto mean = result.jaccard_running_mean();
  out << "landmarks: " << result.landmarks.size() << "\n"
      << "non-landmarks: " << result.non_landmarks.size() << "\n"
      << "jaccard running mean (last): " << format_real(mean.empty() ? 1.0 : mean.back()) << "\n"
      << "residual: " << format_real(result.transform.residual) << "\n";
  return kExitOk;
}

int cmd_detect(const RunConfig& c, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const auto dir = ensure_out_dir(c);
  auto prepared = prepare(c);
  auto lm = resolve_landmarks(prepared.pair, c.landmarks, c, err);
  const auto& aligned = lm.aligned;

  TargetRows targets;
  if (!c.pairs_path.empty()) {
    targets = gather_target_pairs(prepared.ea, prepared.eb, *aligned.transform, read_word_pairs(c.pairs_path));
  } else if (!c.targets_path.empty()) {
    targets = gather_targets(aligned, read_word_list(c.targets_path));
  } else {
    targets = gather_targets(aligned, aligned.words);
  }

  DetectionResult result;
  const auto params = s4_params(c);
  if (c.detector.rfind("cos:", 0) == 0) {
    result = classify_cosine(targets, parse_fraction(c.detector.substr(4), c.detector));
  } else if (c.detector == "cdf") {
    Rng rng(params.seed);
    const auto samples = calibration_samples(aligned, lm.stable, lm.unstable, params.batch_sizes(), rng);
    const double t = select_threshold_loocv(samples);
    out << "cdf threshold: " << format_real(t) << "\n";
    result = classify_cdf(aligned, targets, t);
  } else if (c.detector == "s4d") {
    if (check_perturbation_rate(params.r)) err << "warning: perturbation rate r > 1\n";
    auto trained = s4d_train(aligned, lm.stable, lm.unstable, params);
    write_json(dir / "weights.json", to_json(trained.weights));
    result = classify_s4d(trained.weights, targets);
  } else {
    throw UsageError("unknown detector '" + c.detector + "' (expected cos:T, cdf or s4d)");
  }

  write_file_atomic(dir / "predictions.tsv", format_predictions_tsv(result));
  write_json(dir / "transform.json", to_json(*aligned.transform));
  if (!result.skipped.empty()) write_file_atomic(dir / "skipped.txt", format_word_list(result.skipped));
  const long positives = std::count_if(result.predictions.begin(), result.predictions.end(),
                                       [](const ShiftPrediction& p) { return p.label == 1; });
  out << "scored: " << result.predictions.size() << ", skipped: " << result.skipped.size()
      << ", predicted shifted: " << positives << "\n";
  if (!c.gold_path.empty()) {
    auto report = score(result.predictions, read_gold_labels(c.gold_path));
    report.n_skipped += static_cast<long>(result.skipped.size());
    write_json(dir / "report.json", to_json(report));
    out << "accuracy " << format_real(report.accuracy) << "  precision " << format_real(report.precision)
        << "  recall " << format_real(report.recall) << "  f1 " << format_real(report.f1) << "\n";
  }
  echo_config(dir, sub);
  return kExitOk;
}

int cmd_discover(const RunConfig& c, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const auto dir = ensure_out_dir(c);
  auto prepared = prepare(c);
  const auto metric = parse_shift_metric(c.metric);
  auto lm = resolve_landmarks(prepared.pair, c.landmarks, c, err);
  auto ranked = rank_shifts(lm.aligned, metric, c.landmarks);
  write_file_atomic(dir / "ranked.tsv", format_ranked_tsv(ranked));
  write_json(dir / "transform.json", to_json(*lm.aligned.transform));

  const auto k = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(std::max(c.k, 1)), ranked.size()));
  out << "top " << k << " shifted (" << c.landmarks << "):\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(k, 10); ++i)
    out << "  " << ranked.entries[i].first << '\t' << format_real(ranked.entries[i].second) << "\n";

  if (!c.compare.empty() || !c.compare_transform.empty()) {
    AlignedPair other;
    std::string other_name;
    if (!c.compare_transform.empty()) {
      auto t = transform_from_json(nlohmann::json::parse(read_text_file(c.compare_transform)));
      if (t.dimension() != prepared.pair.dimension())
        throw DataError("compare transform dimension does not match the embeddings");
      other = prepared.pair;
      other.a = prepared.pair.a * t.q;
      other.transform = std::move(t);
      other_name = "transform";
    } else {
      other = resolve_landmarks(prepared.pair, c.compare, c, err).aligned;
      other_name = c.compare;
    }
    auto ranked_other = rank_shifts(other, metric, other_name);
    write_file_atomic(dir / "ranked_compare.tsv", format_ranked_tsv(ranked_other));
    const auto diff = unique_words(ranked, ranked_other, k);
    write_file_atomic(dir / "unique.tsv", format_unique_tsv(diff, "primary", "compare"));
    auto ks = c.ks.empty() ? default_topk_grid(ranked.size()) : c.ks;
    if (!ks.empty()) {
      const auto mode = c.topk_mode == "union" ? TopKMode::union_ : TopKMode::first;
      if (c.topk_mode != "union" && c.topk_mode != "first")
        throw UsageError("--topk-mode must be first or union");
      const auto curve = spearman_topk(ranked, ranked_other, ks, mode);
      write_file_atomic(dir / "spearman.tsv", format_rho_tsv(curve));
    }
    out << "unique to primary: " << diff.only_x.size() << ", unique to compare: " << diff.only_y.size()
        << ", common: " << diff.common.size() << "\n";
  }
  echo_config(dir, sub);
  return kExitOk;
}

int cmd_synth(RunConfig c, const CLI::App& sub, std::ostream& out) {
  const auto dir = ensure_out_dir(c);
  if (c.rotation == "random" || c.rotation == "random_orthogonal") {
    c.synth.rotation = SyntheticSpec::Rotation::random_orthogonal;
  } else if (c.rotation == "none") {
    c.synth.rotation = SyntheticSpec::Rotation::none;
  } else {
    throw UsageError("--rotation must be none or random");
  }
  c.synth.seed = c.seed;
  const auto data = generate_synthetic_pair(c.synth);
  save_word2vec_text(data.a, dir / "A.txt");
  save_word2vec_text(data.b, dir / "B.txt");
  write_file_atomic(dir / "gold.tsv", format_gold_tsv(data.gold));
  echo_config(dir, sub);
  out << "wrote " << data.pair.size() << " words, dimension " << data.pair.dimension() << ", "
      << c.synth.planted_count() << " planted shifts to " << dir.string() << "\n";
  return kExitOk;
}

void add_embedding_options(CLI::App& sub, RunConfig& c) {
  sub.add_option("--a", c.path_a, "Source embeddings (word2vec text)")->required();
  sub.add_option("--b", c.path_b, "Reference embeddings (word2vec text)")->required();
  sub.add_option("--freq", c.freq_path, "Frequency file (word<TAB>count) overriding file order");
  sub.add_option("--norm", c.normalization, "Row normalization: none, l2, center_l2")->capture_default_str();
  sub.add_option("--out", c.out_dir, "Output directory")->required();
  sub.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub.add_option("--config", c.config_path, "key=value file; command-line flags take precedence");
}

void add_s4_options(CLI::App& sub, RunConfig& c) {
  sub.add_option("--profile", c.profile, "Parameter profile: s4d, english, german, latin, swedish");
  sub.add_option("--n-pos", c.n_pos, "Positive samples per iteration (default 1000)");
  sub.add_option("--n-neg", c.n_neg, "Negative samples per iteration (default 1000)");
  sub.add_option("--r", c.r, "Perturbation rate in (0, 2] (default 0.25)");
  sub.add_option("--iterations", c.iterations, "Iterations K (default 100)");
  sub.add_option("--lr", c.lr, "Learning rate (default 0.01)");
  sub.add_option("--optimizer", c.optimizer, "adam or gd (default adam)");
  sub.add_option("--inner-epochs", c.inner_epochs, "Optimizer updates per batch (default 1)");
  sub.add_option("--hidden", c.hidden, "Hidden units (default 100)");
  sub.add_option("--s4a-init", c.s4a_init, "S4-A init: all_landmarks or cosine_split[:q]")->capture_default_str();
  sub.add_option("--warmup", c.warmup, "S4-A classifier iterations before the first landmark refresh")
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = args_in;
  RunConfig c;
  CLI::App app{"Lexical semantic change detection between two embedding spaces", "semshift"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto* align_cmd = app.add_subcommand("align", "Align A to B on a landmark strategy");
  add_embedding_options(*align_cmd, c);
  add_s4_options(*align_cmd, c);
  align_cmd->add_option("--landmarks", c.landmarks, "global | top-freq:F | bot-freq:F | file:PATH | s4a")
      ->capture_default_str();

  auto* landmarks_cmd = app.add_subcommand("landmarks", "Learn landmarks with S4-A");
  add_embedding_options(*landmarks_cmd, c);
  add_s4_options(*landmarks_cmd, c);

  auto* detect_cmd = app.add_subcommand("detect", "Predict shifted words");
  add_embedding_options(*detect_cmd, c);
  add_s4_options(*detect_cmd, c);
  detect_cmd->add_option("--landmarks", c.landmarks, "global | top-freq:F | bot-freq:F | file:PATH | s4a")
      ->capture_default_str();
  detect_cmd->add_option("--detector", c.detector, "cos:T | cdf | s4d")->capture_default_str();
  detect_cmd->add_option("--targets", c.targets_path, "Target words, one per line (default: all common words)");
  detect_cmd->add_option("--pairs", c.pairs_path, "Two-column file of (wordA, wordB) targets");
  detect_cmd->add_option("--gold", c.gold_path, "Gold labels: word<TAB>label");

  auto* discover_cmd = app.add_subcommand("discover", "Rank words by shift and compare alignments");
  add_embedding_options(*discover_cmd, c);
  add_s4_options(*discover_cmd, c);
  discover_cmd->add_option("--landmarks", c.landmarks, "Primary landmark strategy")->capture_default_str();
  discover_cmd->add_option("--metric", c.metric, "euclidean or cosine")->capture_default_str();
  discover_cmd->add_option("--k", c.k, "Top-k size for the unique-word diff")->capture_default_str();
  discover_cmd->add_option("--compare", c.compare, "Second landmark strategy to compare against");
  discover_cmd->add_option("--compare-transform", c.compare_transform, "Transform JSON to compare against");
  discover_cmd->add_option("--ks", c.ks, "k values for the Spearman curve (default 10..500 step 10)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->delimiter(',');
  discover_cmd->add_option("--topk-mode", c.topk_mode, "first or union")->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-shift benchmark pair");
  synth_cmd->add_option("--vocab-size", c.synth.vocab_size)->capture_default_str();
  synth_cmd->add_option("--dim", c.synth.dimension)->capture_default_str();
  synth_cmd->add_option("--shift-fraction", c.synth.shift_fraction)->capture_default_str();
  synth_cmd->add_option("--shift-strength", c.synth.shift_strength)->capture_default_str();
  synth_cmd->add_option("--noise", c.synth.noise_sigma)->capture_default_str();
  synth_cmd->add_option("--rotation", c.rotation, "none or random")->capture_default_str();
  synth_cmd->add_option("--seed", c.seed)->capture_default_str();
  synth_cmd->add_option("--out", c.out_dir, "Output directory")->required();
  synth_cmd->add_option("--config", c.config_path, "key=value file; command-line flags take precedence");

  try {
    // Config values are spliced in right after the subcommand so that later
    // command-line flags override them.
    for (std::size_t i = 2; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (path.empty()) continue;
      auto extra = config_file_args(path);
      args.insert(args.begin() + 2, extra.begin(), extra.end());
      break;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      const auto parsed = app.get_subcommands();
      out << (parsed.empty() ? app.help() : parsed.front()->help());
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }

    if (align_cmd->parsed()) return cmd_align(c, *align_cmd, out, err);
    if (landmarks_cmd->parsed()) return cmd_landmarks(c, *landmarks_cmd, out, err);
    if (detect_cmd->parsed()) return cmd_detect(c, *detect_cmd, out, err);
    if (discover_cmd->parsed()) return cmd_discover(c, *discover_cmd, out, err);
    if (synth_cmd->parsed()) return cmd_synth(c, *synth_cmd, out);
    err << "error: no subcommand\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace semshift::cli
