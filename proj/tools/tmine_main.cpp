// tmine: sentence generation, PMI scoring, classification and mining of
// commonsense triples.
//
// Exit codes: 0 ok, 1 data error, 2 backend/transport error, 3 config error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tmine/backend.hpp"
#include "tmine/cache.hpp"
#include "tmine/errors.hpp"
#include "tmine/pipeline.hpp"
#include "tmine/remote.hpp"
#include "tmine/report.hpp"

using namespace tmine;

namespace {

struct GlobalOptions {
  std::string config;
  std::string masked_endpoint;
  std::string causal_endpoint;
  std::string lookup_table;
  std::string mode = "coherency";
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  std::string cache_dir;
  bool skip_bad_records = false;
  std::size_t workers = 1;
  std::string templates;
  bool length_normalize = false;
};

struct IoOptions {
  std::string input;
  std::string output;
  std::string export_format;
  std::string format = "candidate";
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kData: return 1;
    case ErrorKind::kBackend: return 2;
    case ErrorKind::kConfig: return 3;
  }
  return 1;
}

// Flat "key = value" lines; '#' starts a comment. Keys are flag names
// without the leading dashes.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + ": expected a boolean, got '" + v + "'");
}

// Fills options not given on the command line: environment first (endpoints
// only), then the config file.
void resolve_settings(const CLI::App& app, GlobalOptions& g) {
  std::map<std::string, std::string> file;
  if (!g.config.empty()) file = read_config_file(g.config);
  auto given = [&](const std::string& flag) { return app.count("--" + flag) > 0; };

  auto from = [&](const std::string& key, const char* env) -> std::optional<std::string> {
    if (given(key)) return std::nullopt;
    if (env != nullptr) {
      if (const char* v = std::getenv(env); v != nullptr && *v != '\0') return std::string(v);
    }
    if (auto it = file.find(key); it != file.end()) return it->second;
    return std::nullopt;
  };

  static const std::set<std::string> known = {
      "masked-endpoint", "causal-endpoint", "lookup-table", "mode", "lambda", "seed", "cache-dir",
      "skip-bad-records", "workers", "templates", "length-normalize"};
  for (const auto& [key, value] : file) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (auto v = from("masked-endpoint", "TM_MASKED_URL")) g.masked_endpoint = *v;
    if (auto v = from("causal-endpoint", "TM_CAUSAL_URL")) g.causal_endpoint = *v;
    if (auto v = from("lookup-table", nullptr)) g.lookup_table = *v;
    if (auto v = from("mode", nullptr)) g.mode = *v;
    if (auto v = from("lambda", nullptr)) g.lambda = std::stod(*v);
    if (auto v = from("seed", nullptr)) g.seed = std::stoull(*v);
    if (auto v = from("cache-dir", nullptr)) g.cache_dir = *v;
    if (auto v = from("skip-bad-records", nullptr)) g.skip_bad_records = parse_bool("skip-bad-records", *v);
    if (auto v = from("workers", nullptr)) g.workers = std::stoul(*v);
    if (auto v = from("templates", nullptr)) g.templates = *v;
    if (auto v = from("length-normalize", nullptr)) g.length_normalize = parse_bool("length-normalize", *v);
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (g.workers == 0) throw ConfigError("--workers must be at least 1");
  if (g.lambda && *g.lambda < 0) throw ConfigError("--lambda must be >= 0");
}

// Owns whatever backends and caches a run needs.
class Session {
 public:
  explicit Session(const GlobalOptions& g) {
    auto mode = parse_generation_mode(g.mode);
    if (!mode) throw ConfigError("unknown mode '" + g.mode + "'");
    mode_ = *mode;

    if (!g.templates.empty()) {
      registry_ = std::make_unique<TemplateRegistry>(TemplateRegistry::load(g.templates));
      ctx_.registry = registry_.get();
    }
    if (!g.lookup_table.empty()) lookup_ = std::make_unique<LookupBackend>(LookupBackend::from_json_file(g.lookup_table));
    if (!g.masked_endpoint.empty()) remote_masked_ = std::make_unique<RemoteBackend>(g.masked_endpoint);
    if (!g.causal_endpoint.empty()) remote_causal_ = std::make_unique<RemoteBackend>(g.causal_endpoint);

    MaskedScorer* masked = remote_masked_ ? static_cast<MaskedScorer*>(remote_masked_.get())
                                          : static_cast<MaskedScorer*>(lookup_.get());
    CausalScorer* causal = remote_causal_ ? static_cast<CausalScorer*>(remote_causal_.get())
                                          : static_cast<CausalScorer*>(lookup_.get());
    if (!g.cache_dir.empty()) {
      cache_ = std::make_unique<ScoreCache>(std::filesystem::path(g.cache_dir) / "scores.cache");
      if (masked != nullptr) {
        cached_masked_ = std::make_unique<CachedMaskedScorer>(*masked, *cache_);
        masked = cached_masked_.get();
      }
      if (causal != nullptr) {
        cached_causal_ = std::make_unique<CachedCausalScorer>(*causal, *cache_);
        causal = cached_causal_.get();
      }
    }
    ctx_.masked = masked;
    ctx_.causal = causal;

    config_.mode = mode_;
    config_.lambda = g.lambda;
    config_.seed = g.seed;
    config_.workers = g.workers;
    config_.length_normalize = g.length_normalize;
  }

  GenerationMode mode() const { return mode_; }
  RunConfig& config() { return config_; }
  const ScoringContext& context() const { return ctx_; }
  const TemplateRegistry& registry() const { return *ctx_.registry; }
  const RemoteBackend* remote_masked() const { return remote_masked_.get(); }
  const RemoteBackend* remote_causal() const { return remote_causal_.get(); }
  const LookupBackend* lookup() const { return lookup_.get(); }

 private:
  GenerationMode mode_ = GenerationMode::kCoherency;
  RunConfig config_;
  ScoringContext ctx_;
  std::unique_ptr<TemplateRegistry> registry_;
  std::unique_ptr<LookupBackend> lookup_;
  std::unique_ptr<RemoteBackend> remote_masked_;
  std::unique_ptr<RemoteBackend> remote_causal_;
  std::unique_ptr<ScoreCache> cache_;
  std::unique_ptr<CachedMaskedScorer> cached_masked_;
  std::unique_ptr<CachedCausalScorer> cached_causal_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: skipped " << w << '\n';
}

std::vector<Triple> load_candidates(const std::string& path, const GlobalOptions& g, const Session& s) {
  auto in = open_input(path);
  std::vector<std::string> warnings;
  auto out = read_candidate_triples(in, s.registry().relation_set(), g.skip_bad_records, &warnings);
  print_warnings(warnings);
  return out;
}

std::vector<LabeledTriple> load_labeled(const std::string& path, const GlobalOptions& g, const Session& s) {
  auto in = open_input(path);
  std::vector<std::string> warnings;
  auto out = read_labeled_triples(in, s.registry().relation_set(), g.skip_bad_records, &warnings);
  print_warnings(warnings);
  return out;
}

// Triples from either format; labels are dropped.
std::vector<Triple> load_any(const IoOptions& io, const GlobalOptions& g, const Session& s) {
  if (io.format == "candidate") return load_candidates(io.input, g, s);
  std::vector<Triple> out;
  for (auto& lt : load_labeled(io.input, g, s)) out.push_back(std::move(lt.triple));
  return out;
}

void emit(const Report& report, const IoOptions& io) {
  ExportFormat fmt = ExportFormat::kTsv;
  if (!io.export_format.empty()) {
    fmt = *parse_export_format(io.export_format);
  } else if (std::filesystem::path(io.output).extension() == ".json") {
    fmt = ExportFormat::kJson;
  }
  if (io.output.empty() || io.output == "-") {
    fmt == ExportFormat::kTsv ? write_report_tsv(report, std::cout) : write_report_json(report, std::cout);
  } else {
    export_report(report, io.output, fmt);
  }
  for (const auto& [triple, error] : report.failures) {
    std::cerr << "warning: " << serialize_triple_line(triple) << ": " << error << '\n';
  }
}

void add_io(CLI::App* cmd, IoOptions& io, bool with_format) {
  cmd->add_option("-i,--input", io.input, "Input file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", io.output, "Output file (stdout when omitted)");
  cmd->add_option("--export-format", io.export_format, "tsv or json (default from extension)")
      ->check(CLI::IsMember({"tsv", "json"}));
  if (with_format) {
    cmd->add_option("--format", io.format, "Input format")->check(CLI::IsMember({"candidate", "ckbc"}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised commonsense triple scoring and mining"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "Flat key = value config file");
  app.add_option("--masked-endpoint", g.masked_endpoint, "Masked-LM service URL (env TM_MASKED_URL)");
  app.add_option("--causal-endpoint", g.causal_endpoint, "Causal-LM service URL (env TM_CAUSAL_URL)");
  app.add_option("--lookup-table", g.lookup_table, "JSON lookup table serving both model roles");
  app.add_option("--mode", g.mode, "concat, template, template+grammar or coherency");
  app.add_option("--lambda", g.lambda, "Fixed PMI weight");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--cache-dir", g.cache_dir, "Directory for the persistent score cache");
  app.add_flag("--skip-bad-records", g.skip_bad_records, "Warn about malformed records instead of failing");
  app.add_option("--workers", g.workers, "Concurrent scoring workers");
  app.add_option("--templates", g.templates, "Template registry JSON (default: bundled)");
  app.add_flag("--length-normalize", g.length_normalize, "Rank coherency candidates per word");

  IoOptions gen_io, score_io, classify_io, mine_io, tune_io;

  auto* generate = app.add_subcommand("generate", "Render the sentence for each triple");
  add_io(generate, gen_io, true);

  auto* score = app.add_subcommand("score", "PMI components and score per triple");
  add_io(score, score_io, true);

  auto* classify = app.add_subcommand("classify", "Cluster labeled triples and report F1");
  std::string valid_path;
  LambdaGrid grid;
  classify->add_option("-i,--input", classify_io.input, "Labeled triples (ckbc-tsv)")->check(CLI::ExistingFile);
  classify->add_option("--valid", valid_path, "Valid triples (candidate-tsv); negatives are sampled")
      ->check(CLI::ExistingFile);
  classify->add_option("-o,--output", classify_io.output, "Output file (stdout when omitted)");
  classify->add_option("--export-format", classify_io.export_format)->check(CLI::IsMember({"tsv", "json"}));
  classify->add_option("--grid-lo", grid.lo, "Lower end of the lambda grid");
  classify->add_option("--grid-hi", grid.hi, "Upper end of the lambda grid");
  classify->add_option("--grid-points", grid.points, "Number of grid points");

  auto* mine = app.add_subcommand("mine", "Rank candidate triples and keep the top k");
  std::size_t top_k = 100;
  std::size_t per_relation = 0;
  add_io(mine, mine_io, false);
  mine->add_option("--top-k", top_k, "Rows to keep");
  mine->add_option("--per-relation", per_relation, "Sample at most this many candidates per relation");

  auto* tune = app.add_subcommand("tune-lambda", "Re-run the lambda search on an exported report");
  LambdaGrid tune_grid;
  tune->add_option("-i,--input", tune_io.input, "TSV export with component columns")
      ->required()
      ->check(CLI::ExistingFile);
  tune->add_option("--grid-lo", tune_grid.lo);
  tune->add_option("--grid-hi", tune_grid.hi);
  tune->add_option("--grid-points", tune_grid.points);

  auto* serve_check = app.add_subcommand("serve-check", "Query the configured backends");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    resolve_settings(app, g);
    Session session(g);

    if (*generate) {
      auto triples = load_any(gen_io, g, session);
      std::ostream* out = &std::cout;
      std::ofstream file;
      if (!gen_io.output.empty() && gen_io.output != "-") {
        file.open(gen_io.output, std::ios::binary | std::ios::trunc);
        if (!file) throw DataError("cannot open " + gen_io.output + " for writing");
        out = &file;
      }
      *out << "relation\thead\ttail\tsentence\ttemplate\n";
      for (const auto& t : triples) {
        auto s = generate_sentence(t, session.mode(), session.context(), g.length_normalize);
        *out << t.relation << '\t' << join_words(t.head) << '\t' << join_words(t.tail) << '\t' << s.str()
             << '\t'
             << (s.template_id ? s.template_id->relation + "#" + std::to_string(s.template_id->ordinal) : "-")
             << '\n';
      }
      return 0;
    }

    if (*score) {
      auto report = run_scoring(session.config(), load_any(score_io, g, session), session.context());
      emit(report, score_io);
      return 0;
    }

    if (*classify) {
      if (classify_io.input.empty() == valid_path.empty()) {
        throw ConfigError("classify needs exactly one of --input or --valid");
      }
      std::vector<LabeledTriple> data;
      if (!valid_path.empty()) {
        data = build_balanced_dataset(load_candidates(valid_path, g, session), g.seed);
      } else {
        data = load_labeled(classify_io.input, g, session);
      }
      session.config().grid = grid;
      auto report = run_task1(session.config(), data, session.context());
      std::cerr << "lambda " << format_fixed(report.lambda) << "  F1 " << format_fixed(report.f1.value_or(0))
                << '\n';
      emit(report, classify_io);
      return 0;
    }

    if (*mine) {
      auto candidates = load_candidates(mine_io.input, g, session);
      if (per_relation > 0) candidates = stratified_sample(candidates, per_relation, g.seed);
      auto report = run_task2(session.config(), candidates, top_k, session.context());
      emit(report, mine_io);
      return 0;
    }

    if (*tune) {
      auto in = open_input(tune_io.input);
      auto rows = read_components_tsv(in);
      std::vector<PmiComponents> comps;
      for (const auto& r : rows) comps.push_back(r.components);
      auto result = tune_lambda_grid(comps, tune_grid, g.seed, {}, g.workers);
      std::cout << "lambda\taic\n";
      for (const auto& p : result.grid) {
        std::cout << format_fixed(p.lambda) << '\t' << (p.aic ? format_fixed(*p.aic) : "nan") << '\n';
      }
      std::cout << "best_lambda\t" << format_fixed(result.best_lambda) << '\n';
      bool labeled = !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.label; });
      if (labeled) {
        std::vector<bool> truth;
        for (const auto& r : rows) truth.push_back(*r.label);
        auto predicted = classify_by_mixture(result.scores_at_best, result.model_at_best);
        std::cout << "f1\t" << format_fixed(f1_score(predicted, truth)) << '\n';
      }
      return 0;
    }

    if (*serve_check) {
      bool any = false;
      for (auto [role, remote] : {std::pair{"masked", session.remote_masked()}, std::pair{"causal", session.remote_causal()}}) {
        if (remote == nullptr) continue;
        auto info = remote->info();
        std::cout << role << '\t' << remote->endpoint() << '\t' << info.model_tag << '\t' << info.max_tokens << '\n';
        any = true;
      }
      if (session.lookup() != nullptr) {
        std::cout << "lookup\t" << g.lookup_table << '\t' << session.lookup()->model_tag() << '\n';
        any = true;
      }
      if (!any) throw ConfigError("no backend configured");
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
