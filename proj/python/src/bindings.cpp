#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tmine/backend.hpp"
#include "tmine/cluster.hpp"
#include "tmine/coherency.hpp"
#include "tmine/errors.hpp"
#include "tmine/pipeline.hpp"
#include "tmine/remote.hpp"
#include "tmine/report.hpp"

namespace py = pybind11;
using namespace tmine;

namespace {

GenerationMode mode_from(const std::string& name) {
  auto mode = parse_generation_mode(name);
  if (!mode) throw ConfigError("unknown mode '" + name + "'");
  return *mode;
}

// Keeps an optional custom registry alive for the duration of a call.
struct Context {
  std::optional<TemplateRegistry> registry;
  ScoringContext ctx;

  Context(MaskedScorer* masked, CausalScorer* causal, const std::optional<std::string>& templates) {
    ctx.masked = masked;
    ctx.causal = causal;
    if (templates) {
      registry = TemplateRegistry::load(*templates);
      ctx.registry = &*registry;
    }
  }
};

RunConfig make_config(const std::string& mode, std::optional<double> lambda, std::uint64_t seed,
                      std::size_t workers, bool length_normalize) {
  RunConfig cfg;
  cfg.mode = mode_from(mode);
  cfg.lambda = lambda;
  cfg.seed = seed;
  cfg.workers = workers;
  cfg.length_normalize = length_normalize;
  return cfg;
}

Triple make_triple(const std::string& head, const std::string& relation, const std::string& tail) {
  if (!TemplateRegistry::bundled().contains(relation)) throw UnknownRelationError(0, relation);
  return {normalize_surface(head), relation, normalize_surface(tail), std::nullopt};
}

std::string report_text(const Report& r, ExportFormat fmt) {
  std::ostringstream out;
  fmt == ExportFormat::kTsv ? write_report_tsv(r, out) : write_report_json(r, out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_tmine, m) {
  m.doc() = "Commonsense triple scoring core";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", error);
  py::register_exception<BackendError>(m, "BackendError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);

  py::class_<Triple>(m, "Triple")
      .def(py::init(&make_triple), py::arg("head"), py::arg("relation"), py::arg("tail"))
      .def_readonly("head", &Triple::head)
      .def_readonly("relation", &Triple::relation)
      .def_readonly("tail", &Triple::tail)
      .def_readonly("source_id", &Triple::source_id)
      .def("__eq__", [](const Triple& a, const Triple& b) { return a.same_content(b); })
      .def("__repr__", [](const Triple& t) {
        return "Triple(" + join_words(t.head) + ", " + t.relation + ", " + join_words(t.tail) + ")";
      });

  py::class_<LabeledTriple>(m, "LabeledTriple")
      .def(py::init([](Triple t, bool label) { return LabeledTriple{std::move(t), label}; }), py::arg("triple"),
           py::arg("label"))
      .def_readonly("triple", &LabeledTriple::triple)
      .def_readonly("label", &LabeledTriple::label);

  m.def("normalize_surface", [](const std::string& s) { return normalize_surface(s); });
  m.def("relations", [] { return TemplateRegistry::bundled().relations(); });
  m.def("parse_labeled_line", [](const std::string& line) {
    return parse_labeled_line(line, TemplateRegistry::bundled().relation_set());
  });
  m.def("parse_candidate_line", [](const std::string& line) {
    return parse_candidate_line(line, TemplateRegistry::bundled().relation_set());
  });

  // ---- backends ----
  py::class_<MaskedScorer>(m, "MaskedScorer");
  py::class_<CausalScorer>(m, "CausalScorer");

  py::class_<LookupBackend, MaskedScorer, CausalScorer>(m, "LookupBackend")
      .def_static("from_json", [](const std::string& text) { return LookupBackend::from_json_text(text, "lookup"); })
      .def_static("from_file", &LookupBackend::from_json_file)
      .def("causal_log_likelihood",
           [](LookupBackend& b, const std::string& s) { return b.causal_log_likelihood(normalize_surface(s)); })
      .def_property_readonly("model_tag", &LookupBackend::model_tag);

  py::class_<UniformBackend, MaskedScorer, CausalScorer>(m, "UniformBackend")
      .def(py::init<std::size_t>(), py::arg("vocab_size"))
      .def("causal_log_likelihood",
           [](UniformBackend& b, const std::string& s) { return b.causal_log_likelihood(normalize_surface(s)); });

  py::class_<FunctionBackend, MaskedScorer, CausalScorer>(m, "FunctionBackend",
                                                          "masked(tokens, position, token) -> logprob, "
                                                          "causal(tokens) -> loglik")
      .def(py::init([](FunctionBackend::MaskedFn masked, std::optional<FunctionBackend::CausalFn> causal,
                       std::string tag) {
             return FunctionBackend(std::move(masked), causal.value_or(nullptr), std::move(tag));
           }),
           py::arg("masked"), py::arg("causal") = py::none(), py::arg("model_tag") = "function");

  py::class_<RemoteBackend, MaskedScorer, CausalScorer>(m, "RemoteBackend")
      .def(py::init([](std::string endpoint) { return std::make_unique<RemoteBackend>(std::move(endpoint)); }),
           py::arg("endpoint"))
      .def("info",
           [](const RemoteBackend& b) {
             auto i = b.info();
             return py::dict(py::arg("model_tag") = i.model_tag, py::arg("max_tokens") = i.max_tokens);
           },
           py::call_guard<py::gil_scoped_release>());

  // ---- generation ----
  m.def(
      "generate",
      [](const Triple& t, const std::string& mode, CausalScorer* causal, const std::optional<std::string>& templates) {
        Context c(nullptr, causal, templates);
        return generate_sentence(t, mode_from(mode), c.ctx).str();
      },
      py::arg("triple"), py::arg("mode") = "template+grammar", py::arg("causal") = nullptr,
      py::arg("templates") = py::none());

  m.def("enumerate_candidates", [](const Triple& t) {
    std::vector<std::string> out;
    for (const auto& c : enumerate_candidates(t, TemplateRegistry::bundled(), Grammar::bundled())) {
      out.push_back(c.str());
    }
    return out;
  });

  m.def(
      "select_best",
      [](const Triple& t, CausalScorer& causal) {
        auto ranked = select_best(enumerate_candidates(t, TemplateRegistry::bundled(), Grammar::bundled()), causal);
        std::vector<std::pair<std::string, double>> out;
        for (const auto& c : ranked.all) out.emplace_back(c.str(), *c.coherency_loglik);
        return out;
      },
      py::arg("triple"), py::arg("causal"), "All candidates with log-likelihoods, best first.");

  // ---- scoring ----
  py::class_<PmiComponents>(m, "PmiComponents")
      .def(py::init([](double ct, double mt, double ch, double mh) { return PmiComponents{ct, mt, ch, mh}; }),
           py::arg("cond_tail"), py::arg("marg_tail"), py::arg("cond_head"), py::arg("marg_head"))
      .def_readonly("cond_tail", &PmiComponents::cond_tail)
      .def_readonly("marg_tail", &PmiComponents::marg_tail)
      .def_readonly("cond_head", &PmiComponents::cond_head)
      .def_readonly("marg_head", &PmiComponents::marg_head)
      .def("combine", &PmiComponents::combine, py::arg("lam"));

  m.def(
      "score_triple",
      [](const Triple& t, MaskedScorer& masked, CausalScorer* causal, const std::string& mode) {
        Context c(&masked, causal, std::nullopt);
        auto est = estimate_triple(t, mode_from(mode), c.ctx);
        return py::make_tuple(est.sentence.str(), est.components);
      },
      py::arg("triple"), py::arg("masked"), py::arg("causal") = nullptr, py::arg("mode") = "template+grammar",
      "(sentence, PmiComponents) for one triple.");

  // ---- clustering ----
  py::class_<MixtureModel>(m, "MixtureModel")
      .def_readonly("weights", &MixtureModel::weights)
      .def_readonly("means", &MixtureModel::means)
      .def_readonly("variances", &MixtureModel::variances)
      .def_readonly("loglik", &MixtureModel::loglik)
      .def_readonly("iterations", &MixtureModel::iterations)
      .def_readonly("converged", &MixtureModel::converged)
      .def("classify", [](const MixtureModel& model, const std::vector<double>& xs) {
        return classify_by_mixture(xs, model);
      });

  m.def("fit_gmm_em", [](const std::vector<double>& xs, std::uint64_t seed) { return fit_gmm_em(xs, seed); },
        py::arg("scores"), py::arg("seed") = 0);
  m.def("aic", [](const MixtureModel& model) { return aic(model); });
  m.def("f1_score", &f1_score, py::arg("predicted"), py::arg("truth"));
  m.def("lambda_grid", [](double lo, double hi, int points) { return LambdaGrid{lo, hi, points}.values(); },
        py::arg("lo") = 0.5, py::arg("hi") = 5.0, py::arg("points") = 90);
  m.def(
      "tune_lambda_grid",
      [](const std::vector<PmiComponents>& comps, double lo, double hi, int points, std::uint64_t seed) {
        auto r = tune_lambda_grid(comps, LambdaGrid{lo, hi, points}, seed);
        std::vector<std::pair<double, std::optional<double>>> grid;
        for (const auto& p : r.grid) grid.emplace_back(p.lambda, p.aic);
        return py::make_tuple(r.best_lambda, grid);
      },
      py::arg("components"), py::arg("lo") = 0.5, py::arg("hi") = 5.0, py::arg("points") = 90, py::arg("seed") = 0,
      "(best_lambda, [(lambda, aic or None), ...])");

  // ---- pipeline ----
  m.def("sample_negatives", &sample_negatives, py::arg("valid"), py::arg("seed"));
  m.def("build_balanced_dataset", &build_balanced_dataset, py::arg("valid"), py::arg("seed"));

  py::class_<ScoredTriple>(m, "ScoredTriple")
      .def_readonly("triple", &ScoredTriple::triple)
      .def_property_readonly("sentence", [](const ScoredTriple& s) { return s.sentence.str(); })
      .def_property_readonly("components", [](const ScoredTriple& s) { return s.pmi.components; })
      .def_property_readonly("score", [](const ScoredTriple& s) { return s.pmi.value; })
      .def_readonly("rank", &ScoredTriple::rank)
      .def_readonly("label", &ScoredTriple::label)
      .def_readonly("predicted", &ScoredTriple::predicted);

  py::class_<Report>(m, "Report")
      .def_readonly("lambda_", &Report::lambda)
      .def_readonly("f1", &Report::f1)
      .def_readonly("rows", &Report::rows)
      .def_property_readonly("failures",
                             [](const Report& r) {
                               std::vector<std::pair<Triple, std::string>> out(r.failures.begin(), r.failures.end());
                               return out;
                             })
      .def("to_tsv", [](const Report& r) { return report_text(r, ExportFormat::kTsv); })
      .def("to_json", [](const Report& r) { return report_text(r, ExportFormat::kJson); })
      .def("export", [](const Report& r, const std::string& path, const std::string& format) {
        auto fmt = parse_export_format(format);
        if (!fmt) throw ConfigError("unknown export format '" + format + "'");
        export_report(r, path, *fmt);
      }, py::arg("path"), py::arg("format") = "tsv");

  m.def(
      "run_scoring",
      [](const std::vector<Triple>& triples, MaskedScorer& masked, CausalScorer* causal, const std::string& mode,
         std::optional<double> lam, std::size_t workers, const std::optional<std::string>& templates) {
        Context c(&masked, causal, templates);
        py::gil_scoped_release release;
        return run_scoring(make_config(mode, lam, 0, workers, false), triples, c.ctx);
      },
      py::arg("triples"), py::arg("masked"), py::arg("causal") = nullptr, py::arg("mode") = "coherency",
      py::arg("lam") = py::none(), py::arg("workers") = 1, py::arg("templates") = py::none());

  m.def(
      "run_task1",
      [](const std::vector<LabeledTriple>& data, MaskedScorer& masked, CausalScorer* causal, const std::string& mode,
         std::optional<double> lam, std::uint64_t seed, std::size_t workers, double lo, double hi, int points,
         const std::optional<std::string>& templates) {
        Context c(&masked, causal, templates);
        auto cfg = make_config(mode, lam, seed, workers, false);
        cfg.grid = LambdaGrid{lo, hi, points};
        py::gil_scoped_release release;
        return run_task1(cfg, data, c.ctx);
      },
      py::arg("data"), py::arg("masked"), py::arg("causal") = nullptr, py::arg("mode") = "coherency",
      py::arg("lam") = py::none(), py::arg("seed") = 0, py::arg("workers") = 1, py::arg("grid_lo") = 0.5,
      py::arg("grid_hi") = 5.0, py::arg("grid_points") = 90, py::arg("templates") = py::none(),
      "Classification: cluster PMI scores with a two-component mixture and report F1.");

  m.def(
      "run_task2",
      [](const std::vector<Triple>& candidates, MaskedScorer& masked, CausalScorer* causal, const std::string& mode,
         std::optional<double> lam, std::size_t top_k, std::size_t workers,
         const std::optional<std::string>& templates) {
        Context c(&masked, causal, templates);
        py::gil_scoped_release release;
        return run_task2(make_config(mode, lam, 0, workers, false), candidates, top_k, c.ctx);
      },
      py::arg("candidates"), py::arg("masked"), py::arg("causal") = nullptr, py::arg("mode") = "coherency",
      py::arg("lam") = py::none(), py::arg("top_k") = 100, py::arg("workers") = 1, py::arg("templates") = py::none(),
      "Mining: rank candidates by PMI (lambda 4 unless given) and keep the top k.");
}
