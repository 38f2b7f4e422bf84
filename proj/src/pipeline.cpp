#include "tmine/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "tmine/errors.hpp"
#include "tmine/parallel.hpp"

namespace tmine {

namespace {

using ContentKey = std::tuple<WordSeq, std::string, WordSeq>;

ContentKey content_key(const Triple& t) { return {t.head, t.relation, t.tail}; }

constexpr int kMaxNegativeAttempts = 1000;

struct Outcome {
  std::optional<TripleEstimate> estimate;
  std::string error;
};

void require_backends(GenerationMode mode, const ScoringContext& ctx) {
  if (ctx.masked == nullptr) throw ConfigError("a masked-LM backend is required");
  if (mode == GenerationMode::kCoherency && ctx.causal == nullptr) {
    throw ConfigError("coherency mode requires a causal-LM backend");
  }
  if (ctx.registry == nullptr || ctx.grammar == nullptr) {
    throw ConfigError("scoring context is missing the template registry or grammar");
  }
}

std::vector<Outcome> estimate_all(const std::vector<Triple>& triples, const RunConfig& config,
                                  const ScoringContext& ctx, bool tolerate_data_errors) {
  require_backends(config.mode, ctx);
  std::vector<Outcome> out(triples.size());
  parallel_for(triples.size(), config.workers, [&](std::size_t i) {
    try {
      out[i].estimate = estimate_triple(triples[i], config.mode, ctx, config.length_normalize);
    } catch (const DataError& e) {
      if (!tolerate_data_errors) {
        throw DataError("triple " + std::to_string(i + 1) + " (" + serialize_triple_line(triples[i]) +
                        "): " + e.what());
      }
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % n;
}

std::vector<LabeledTriple> sample_negatives(const std::vector<Triple>& valid, std::uint64_t seed) {
  if (valid.size() < 2) throw SamplingError("negative sampling needs at least 2 valid triples");
  std::set<ContentKey> pool;
  for (const auto& t : valid) pool.insert(content_key(t));

  std::mt19937_64 rng(seed);
  std::vector<LabeledTriple> out;
  out.reserve(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxNegativeAttempts && !accepted; ++attempt) {
      auto element = uniform_index(rng, 3);
      auto donor = uniform_index(rng, valid.size() - 1);
      if (donor >= i) ++donor;
      Triple negative = valid[i];
      switch (element) {
        case 0: negative.head = valid[donor].head; break;
        case 1: negative.relation = valid[donor].relation; break;
        default: negative.tail = valid[donor].tail; break;
      }
      if (pool.contains(content_key(negative))) continue;
      if (negative.source_id) *negative.source_id += ":neg";
      out.push_back({std::move(negative), false});
      accepted = true;
    }
    if (!accepted) {
      throw SamplingError("could not build a distinct negative for triple " + std::to_string(i + 1) +
                          "; the pool is too homogeneous");
    }
  }
  return out;
}

std::vector<LabeledTriple> build_balanced_dataset(const std::vector<Triple>& valid,
                                                  std::uint64_t seed) {
  std::vector<LabeledTriple> out;
  out.reserve(valid.size() * 2);
  for (const auto& t : valid) out.push_back({t, true});
  auto negatives = sample_negatives(valid, seed);
  out.insert(out.end(), negatives.begin(), negatives.end());
  return out;
}

std::vector<Triple> stratified_sample(const std::vector<Triple>& triples, std::size_t per_relation,
                                      std::uint64_t seed) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_relation;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    auto [it, fresh] = by_relation.try_emplace(triples[i].relation);
    if (fresh) order.push_back(triples[i].relation);
    it->second.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (const auto& relation : order) {
    auto& idx = by_relation[relation];
    // Partial Fisher-Yates over the first per_relation slots.
    const auto take = std::min(per_relation, idx.size());
    for (std::size_t k = 0; k < take; ++k) {
      auto j = k + uniform_index(rng, idx.size() - k);
      std::swap(idx[k], idx[j]);
    }
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(keep.begin(), keep.end());
  std::vector<Triple> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(triples[i]);
  return out;
}

CandidateSentence generate_sentence(const Triple& triple, GenerationMode mode,
                                    const ScoringContext& ctx, bool length_normalize) {
  switch (mode) {
    case GenerationMode::kConcat:
      return generate_concatenation(triple);
    case GenerationMode::kTemplate:
    case GenerationMode::kTemplateGrammar:
      return generate_deterministic(triple, mode, *ctx.registry, *ctx.grammar);
    case GenerationMode::kCoherency: {
      if (ctx.causal == nullptr) throw ConfigError("coherency mode requires a causal-LM backend");
      CoherencyOptions options;
      options.length_normalize = length_normalize;
      auto candidates = enumerate_candidates(triple, *ctx.registry, *ctx.grammar);
      return select_best(std::move(candidates), *ctx.causal, options).best;
    }
  }
  throw std::invalid_argument("unknown generation mode");
}

TripleEstimate estimate_triple(const Triple& triple, GenerationMode mode, const ScoringContext& ctx,
                               bool length_normalize) {
  if (ctx.masked == nullptr) throw ConfigError("a masked-LM backend is required");
  TripleEstimate est{generate_sentence(triple, mode, ctx, length_normalize), {}};
  est.components = estimate_components(locate_spans(est.sentence), *ctx.masked);
  return est;
}

Report run_scoring(const RunConfig& config, const std::vector<Triple>& triples,
                   const ScoringContext& ctx) {
  const double lambda = config.lambda.value_or(1.0);
  auto outcomes = estimate_all(triples, config, ctx, /*tolerate_data_errors=*/true);
  Report report;
  report.kind = ReportKind::kScore;
  report.mode = config.mode;
  report.lambda = lambda;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (!outcomes[i].estimate) {
      report.failures.emplace_back(triples[i], outcomes[i].error);
      continue;
    }
    auto& est = *outcomes[i].estimate;
    report.rows.push_back({triples[i], std::move(est.sentence), make_pmi_score(est.components, lambda),
                           std::nullopt, std::nullopt, std::nullopt});
  }
  return report;
}

Report run_task1(const RunConfig& config, const std::vector<LabeledTriple>& data,
                 const ScoringContext& ctx) {
  bool any_true = false, any_false = false;
  std::vector<Triple> triples;
  std::vector<bool> truth;
  for (const auto& d : data) {
    (d.label ? any_true : any_false) = true;
    triples.push_back(d.triple);
    truth.push_back(d.label);
  }
  if (!any_true || !any_false) throw DataError("classification data needs both valid and invalid triples");

  auto outcomes = estimate_all(triples, config, ctx, /*tolerate_data_errors=*/false);
  std::vector<PmiComponents> components;
  components.reserve(outcomes.size());
  for (const auto& o : outcomes) components.push_back(o.estimate->components);

  Report report;
  report.kind = ReportKind::kClassify;
  report.mode = config.mode;
  MixtureModel model;
  if (config.lambda) {
    report.lambda = *config.lambda;
    std::vector<double> scores;
    for (const auto& c : components) scores.push_back(c.combine(report.lambda));
    model = fit_gmm_em(scores, config.seed, config.em);
  } else {
    auto search = tune_lambda_grid(components, config.grid, config.seed, config.em, config.workers);
    report.lambda = search.best_lambda;
    report.grid = std::move(search.grid);
    model = std::move(search.model_at_best);
  }

  std::vector<double> scores;
  for (const auto& c : components) scores.push_back(c.combine(report.lambda));
  auto predicted = classify_by_mixture(scores, model);
  report.f1 = f1_score(predicted, truth);

  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& est = *outcomes[i].estimate;
    report.rows.push_back({data[i].triple, std::move(est.sentence),
                           make_pmi_score(est.components, report.lambda), std::nullopt,
                           data[i].label, static_cast<bool>(predicted[i])});
  }
  return report;
}

Report run_task2(const RunConfig& config, const std::vector<Triple>& candidates, std::size_t top_k,
                 const ScoringContext& ctx) {
  if (candidates.empty()) throw DataError("mining needs at least one candidate triple");
  RunConfig fixed = config;
  fixed.lambda = config.lambda.value_or(kDefaultMiningLambda);
  Report report = run_scoring(fixed, candidates, ctx);
  report.kind = ReportKind::kMine;
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ScoredTriple& a, const ScoredTriple& b) { return a.pmi.value > b.pmi.value; });
  if (report.rows.size() > top_k) report.rows.resize(top_k);
  for (std::size_t i = 0; i < report.rows.size(); ++i) report.rows[i].rank = i + 1;
  return report;
}

}  // namespace tmine
