#include "semshift/cli.hpp"
#include "semshift/semshift.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace semshift;

namespace {

py::dict prediction_dict(const DetectionResult& r) {
  py::list preds;
  for (const auto& p : r.predictions)
    preds.append(py::dict(py::arg("word") = p.word, py::arg("score") = p.score, py::arg("label") = p.label,
                          py::arg("method") = p.method));
  return py::dict(py::arg("predictions") = preds, py::arg("skipped") = r.skipped);
}

std::vector<ShiftPrediction> predictions_from(const py::list& items) {
  std::vector<ShiftPrediction> out;
  for (const auto& item : items) {
    auto d = item.cast<py::dict>();
    out.push_back({d["word"].cast<std::string>(), d.contains("score") ? d["score"].cast<double>() : 0.0,
                   d["label"].cast<int>(), d.contains("method") ? d["method"].cast<std::string>() : ""});
  }
  return out;
}

RankedShiftList ranked_from(const std::vector<std::pair<std::string, double>>& entries) {
  RankedShiftList list;
  list.entries = entries;
  return list;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semantic shift detection between two word-embedding spaces";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def(py::init([](std::vector<std::string> words, Matrix matrix) {
             return EmbeddingTable(std::move(words), std::move(matrix));
           }),
           py::arg("words"), py::arg("matrix"))
      .def_property_readonly("words", &EmbeddingTable::words)
      .def_property_readonly("matrix", &EmbeddingTable::matrix)
      .def_property_readonly("dimension", &EmbeddingTable::dimension)
      .def("__len__", &EmbeddingTable::size)
      .def("rank_of", &EmbeddingTable::rank_of)
      .def("normalized", [](const EmbeddingTable& t, const std::string& mode) {
        return normalize_rows(t, parse_normalization(mode));
      }, py::arg("mode") = "l2");

  m.def("load_word2vec", &load_word2vec_text, py::arg("path"));
  m.def("save_word2vec", &save_word2vec_text, py::arg("table"), py::arg("path"));

  py::class_<AlignedPair>(m, "AlignedPair")
      .def_readonly("words", &AlignedPair::words)
      .def_readonly("a", &AlignedPair::a)
      .def_readonly("b", &AlignedPair::b)
      .def_property_readonly("is_aligned", &AlignedPair::is_aligned)
      .def_property_readonly("q", [](const AlignedPair& p) -> py::object {
        return p.transform ? py::cast(p.transform->q) : py::none();
      })
      .def_property_readonly("landmarks", [](const AlignedPair& p) -> py::object {
        return p.transform ? py::cast(p.transform->landmarks) : py::none();
      })
      .def("__len__", &AlignedPair::size);

  m.def("intersect", [](const EmbeddingTable& a, const EmbeddingTable& b, const std::string& norm) {
    return intersect(normalize_rows(a, parse_normalization(norm)), normalize_rows(b, parse_normalization(norm)));
  }, py::arg("a"), py::arg("b"), py::arg("norm") = "l2",
        "Common vocabulary of two tables after row normalization.");

  m.def("orthogonal_procrustes", &orthogonal_procrustes, py::arg("a"), py::arg("b"));
  m.def("orthogonality_error", &orthogonality_error, py::arg("q"));
  m.def("align", [](const AlignedPair& pair, const std::vector<std::string>& landmarks) {
    return align(pair, std::span<const std::string>(landmarks));
  }, py::arg("pair"), py::arg("landmarks"));
  m.def("align_global", &align_global, py::arg("pair"));
  m.def("landmarks_by_frequency", [](const AlignedPair& p, double fraction, bool top) {
    return select_landmarks_frequency(p, fraction, top ? FrequencyEnd::top : FrequencyEnd::bottom);
  }, py::arg("pair"), py::arg("fraction"), py::arg("top") = true);
  m.def("cosine_distances", &cosine_distances, py::arg("pair"));

  m.def("perturb", &perturb, py::arg("b"), py::arg("w"), py::arg("t"), py::arg("r"));

  py::class_<S4Params>(m, "S4Params")
      .def(py::init<>())
      .def_static("preset", [](const std::string& name) { return s4_preset(name); })
      .def_readwrite("n_pos", &S4Params::n_pos)
      .def_readwrite("n_neg", &S4Params::n_neg)
      .def_readwrite("r", &S4Params::r)
      .def_readwrite("iterations", &S4Params::iterations)
      .def_readwrite("lr", &S4Params::lr)
      .def_readwrite("inner_epochs", &S4Params::inner_epochs)
      .def_readwrite("hidden", &S4Params::hidden)
      .def_readwrite("seed", &S4Params::seed)
      .def_property("optimizer", [](const S4Params& p) { return std::string(to_string(p.optimizer)); },
                    [](S4Params& p, const std::string& name) { p.optimizer = parse_optimizer(name); });

  py::class_<MlpWeights>(m, "MlpWeights")
      .def_readonly("w1", &MlpWeights::w1)
      .def_readonly("b1", &MlpWeights::b1)
      .def_readonly("w2", &MlpWeights::w2)
      .def_readonly("b2", &MlpWeights::b2)
      .def("forward", [](const MlpWeights& w, const Matrix& x) { return forward_batch(w, x); });

  m.def("s4a", [](const AlignedPair& pair, const S4Params& params, const std::string& init, int warmup) {
    S4AOptions options;
    options.init = parse_s4a_init(init);
    options.warmup_iterations = warmup;
    S4AResult r;
    {
      py::gil_scoped_release unlocked;
      r = s4a(pair, params, options);
    }
    return py::dict(py::arg("landmarks") = r.landmarks, py::arg("non_landmarks") = r.non_landmarks,
                    py::arg("q") = r.transform.q, py::arg("weights") = r.weights,
                    py::arg("jaccard") = r.jaccard_history, py::arg("jaccard_mean") = r.jaccard_running_mean());
  }, py::arg("pair"), py::arg("params") = S4Params{}, py::arg("init") = "cosine_split:0.1",
        py::arg("warmup") = 100);

  m.def("s4d_train", [](const AlignedPair& aligned, const S4Params& params) {
    return s4d_train(aligned, params).weights;
  }, py::arg("aligned"), py::arg("params") = S4Params{}, py::call_guard<py::gil_scoped_release>());

  m.def("classify_cosine", [](const AlignedPair& p, const std::vector<std::string>& words, double t) {
    return prediction_dict(classify_cosine(p, words, t));
  }, py::arg("aligned"), py::arg("words"), py::arg("threshold"));
  m.def("classify_cdf", [](const AlignedPair& p, const std::vector<std::string>& words, double t) {
    return prediction_dict(classify_cdf(p, words, t));
  }, py::arg("aligned"), py::arg("words"), py::arg("threshold"));
  m.def("classify_s4d", [](const MlpWeights& w, const AlignedPair& p, const std::vector<std::string>& words) {
    return prediction_dict(classify_s4d(w, p, words));
  }, py::arg("weights"), py::arg("aligned"), py::arg("words"));
  m.def("select_threshold_loocv", [](const std::vector<std::pair<double, int>>& samples) {
    std::vector<CalibrationSample> s;
    for (const auto& [v, l] : samples) s.push_back({v, l});
    return select_threshold_loocv(s);
  }, py::arg("samples"));

  m.def("score", [](const py::list& predictions, const GoldLabels& gold) {
    const auto r = score(predictions_from(predictions), gold);
    return py::dict(py::arg("accuracy") = r.accuracy, py::arg("precision") = r.precision,
                    py::arg("recall") = r.recall, py::arg("f1") = r.f1, py::arg("skipped") = r.n_skipped);
  }, py::arg("predictions"), py::arg("gold"));

  m.def("rank_shifts", [](const AlignedPair& p, const std::string& metric) {
    return rank_shifts(p, parse_shift_metric(metric)).entries;
  }, py::arg("aligned"), py::arg("metric") = "cosine");
  m.def("spearman_topk", [](const std::vector<std::pair<std::string, double>>& x,
                            const std::vector<std::pair<std::string, double>>& y, const std::vector<int>& ks,
                            bool union_mode) {
    std::vector<std::pair<int, double>> out;
    for (const auto& p : spearman_topk(ranked_from(x), ranked_from(y), ks,
                                       union_mode ? TopKMode::union_ : TopKMode::first))
      out.emplace_back(p.k, p.rho);
    return out;
  }, py::arg("x"), py::arg("y"), py::arg("ks"), py::arg("union") = false);
  m.def("jaccard", [](const std::vector<std::string>& previous, const std::vector<std::string>& current) {
    return jaccard(std::span<const std::string>(previous), std::span<const std::string>(current));
  }, py::arg("previous"), py::arg("current"));

  m.def("generate_synthetic", [](int vocab_size, int dimension, double shift_fraction, double shift_strength,
                                 double noise, bool rotate, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.vocab_size = vocab_size;
    spec.dimension = dimension;
    spec.shift_fraction = shift_fraction;
    spec.shift_strength = shift_strength;
    spec.noise_sigma = noise;
    spec.rotation = rotate ? SyntheticSpec::Rotation::random_orthogonal : SyntheticSpec::Rotation::none;
    spec.seed = seed;
    auto s = generate_synthetic_pair(spec);
    return py::dict(py::arg("a") = s.a, py::arg("b") = s.b, py::arg("gold") = s.gold,
                    py::arg("rotation") = s.rotation);
  }, py::arg("vocab_size") = 2000, py::arg("dimension") = 50, py::arg("shift_fraction") = 0.1,
        py::arg("shift_strength") = 0.6, py::arg("noise") = 0.05, py::arg("rotate") = true,
        py::arg("seed") = kDefaultSeed);

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "semshift");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
