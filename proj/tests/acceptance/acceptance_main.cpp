// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "tmine/cache.hpp"
#include "tmine/cluster.hpp"
#include "tmine/coherency.hpp"
#include "tmine/errors.hpp"
#include "tmine/pipeline.hpp"
#include "tmine/pmi.hpp"
#include "tmine/report.hpp"
#include "tmine/sentence_gen.hpp"

using namespace tmine;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

Triple T(const std::string& h, const std::string& r, const std::string& t) {
  return {normalize_surface(h), r, normalize_surface(t), std::nullopt};
}

Outcome golden_sentences() {
  Outcome o;
  const auto& reg = TemplateRegistry::bundled();
  const auto& g = Grammar::bundled();
  auto ferret = T("ferret", "AtLocation", "pet store");
  auto star = T("star", "AtLocation", "outer space");
  auto check = [&](const std::string& got, const std::string& want) {
    o.expect(got == want, "got '" + got + "', want '" + want + "'");
  };
  check(generate_concatenation(ferret).str(), "ferret at location pet store");
  check(generate_deterministic(ferret, GenerationMode::kTemplate, reg, g).str(),
        "you are likely to find ferret in pet store");
  check(generate_deterministic(ferret, GenerationMode::kTemplateGrammar, reg, g).str(),
        "you are likely to find a ferret in a pet store");
  check(generate_deterministic(star, GenerationMode::kTemplateGrammar, reg, g).str(),
        "you are likely to find a star in an outer space");
  return o;
}

Outcome musician_coherency() {
  Outcome o;
  auto cand = [](std::size_t ordinal, const std::string& pattern, const std::string& h, const std::string& t) {
    return render(Template::parse("CapableOf", ordinal, pattern), normalize_surface(h), normalize_surface(t));
  };
  std::vector<CandidateSentence> c = {cand(0, "{0} can {1}", "musician", "playing musical instrument"),
                                      cand(1, "{0} can be {1}", "musician", "play musical instrument"),
                                      cand(2, "{0} often {1}", "musician", "play musical instrument"),
                                      cand(0, "{0} can {1}", "a musician", "play a musical instrument")};
  auto b = make_lookup_backend({{"musician can playing musical instrument", -5.7},
                                {"musician can be play musical instrument", -4.9},
                                {"musician often play musical instrument", -5.5},
                                {"a musician can play a musical instrument", -2.9}},
                               {});
  auto best = select_best(c, b).best.str();
  o.expect(best == "a musician can play a musical instrument", "selected '" + best + "'");

  // Same outcome from the full enumeration, all other candidates scored low.
  LookupBackend::Options opt;
  opt.default_loglik = -50.0;
  LookupBackend wide({{"musician can playing musical instrument", -5.7},
                      {"musician often play musical instrument", -5.5},
                      {"a musician can play a musical instrument", -2.9}},
                     {}, opt);
  auto all = enumerate_candidates(T("musician", "CapableOf", "play musical instrument"),
                                  TemplateRegistry::bundled(), Grammar::bundled());
  best = select_best(all, wide).best.str();
  o.expect(best == "a musician can play a musical instrument", "enumeration selected '" + best + "'");
  return o;
}

Outcome greedy_oracle() {
  Outcome o;
  const WordSeq s = {"you", "are", "likely", "to", "find", "a", "ferret", "in", "pet", "store"};
  auto ctx = [&](std::initializer_list<std::size_t> ps) {
    WordSeq w = s;
    for (auto p : ps) w[p] = std::string(kMaskToken);
    return join_words(w);
  };
  auto pet = make_lookup_backend({}, {{{ctx({8, 9}), 8, "pet"}, 0.2},
                                      {{ctx({8, 9}), 9, "store"}, 0.6},
                                      {{ctx({8}), 8, "pet"}, 0.5}});
  auto trace = greedy_span_loglik(SpanRoles{s, {6}, {8, 9}}, SpanTarget::kTail, KeepMasked::kNone, pet);
  o.expect(trace.steps.size() == 2 && trace.steps[0].token == "store" && trace.steps[1].token == "pet",
           "pet-store commit order");
  o.expect(std::abs(trace.total_loglik - (std::log(0.6) + std::log(0.5))) < 1e-12, "pet-store total");

  std::mt19937_64 rng(99);
  const std::vector<double> levels = {0.05, 0.1, 0.2, 0.3, 0.5, 0.7};
  for (int trial = 0; trial < 500 && o.ok; ++trial) {
    std::size_t j = 1 + trial % 3;
    std::vector<std::size_t> pool = {5, 6, 7, 8, 9};
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::size_t> targets(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(j));
    oracle::StateTable table;
    for (const auto& state : oracle::nonempty_subsets(targets)) {
      for (auto p : state) table[state][p] = levels[rng() % levels.size()];
    }
    // The same table expressed as a context-keyed lookup backend.
    std::map<LookupBackend::MaskedKey, double> entries;
    for (const auto& [state, probs] : table) {
      WordSeq w = s;
      for (auto p : state) w[p] = std::string(kMaskToken);
      for (const auto& [pos, prob] : probs) entries[{join_words(w), pos, s[pos]}] = prob;
    }
    auto backend = make_lookup_backend({}, entries);
    auto expected = oracle::brute_force_greedy(targets, table);
    auto got = greedy_span_loglik(SpanRoles{s, {0}, targets}, SpanTarget::kTail, KeepMasked::kNone, backend);
    std::vector<std::size_t> order;
    for (const auto& st : got.steps) order.push_back(st.position);
    o.expect(order == expected.order, "order mismatch in trial " + std::to_string(trial));
    o.expect(std::abs(got.total_loglik - expected.total) < 1e-12, "total mismatch in trial " + std::to_string(trial));
  }
  return o;
}

Outcome pmi_algebra() {
  Outcome o;
  FunctionBackend free(
      [](const WordSeq&, std::size_t pos, const std::string& tok) {
        return -0.3 - 0.07 * static_cast<double>(pos) - 0.013 * static_cast<double>(tok.size());
      },
      nullptr);
  auto sentence = generate_deterministic(T("ferret", "AtLocation", "pet store"), GenerationMode::kTemplateGrammar,
                                         TemplateRegistry::bundled(), Grammar::bundled());
  auto score = score_pmi(locate_spans(sentence), 1.0, free);
  o.expect(std::abs(score.value) < 1e-12, "context-free value " + std::to_string(score.value));
  PmiComponents c{-1.25, -3.5, -2.0, -2.75};
  double slope = (c.cond_tail + c.cond_head) / 2;
  double v0 = make_pmi_score(c, 0).value, v1 = make_pmi_score(c, 1).value, v2 = make_pmi_score(c, 2).value;
  o.expect(std::abs((v1 - v0) - slope) < 1e-12 && std::abs((v2 - v1) - slope) < 1e-12, "not affine");
  o.expect(make_pmi_score({-1, -3, -2, -3}, 1).value == 1.5, "(-1,-3,-2,-3) at 1");
  o.expect(make_pmi_score({-1, -3, -2, -3}, 2).value == 0.0, "(-1,-3,-2,-3) at 2");
  return o;
}

Outcome gmm_em() {
  Outcome o;
  auto [xs, truth] = oracle::planted_clusters(200, 200, 0.0, 10.0, 42);
  auto m = fit_gmm_em(xs, 7);
  auto hi = m.high_component();
  auto labels = classify_by_mixture(xs, m);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) correct += labels[i] == truth[i];
  double acc = static_cast<double>(correct) / static_cast<double>(xs.size());
  o.expect(acc >= 0.99, "accuracy " + std::to_string(acc));
  o.expect(std::abs(m.means[hi] - 10.0) <= 0.5 && std::abs(m.means[1 - hi]) <= 0.5, "means off");
  for (std::size_t i = 1; i < m.loglik_trace.size(); ++i) {
    o.expect(m.loglik_trace[i] >= m.loglik_trace[i - 1] - 1e-9, "EM not monotone");
  }
  auto one = fit_gaussian(xs);
  o.expect(aic(m) < aic(one.loglik, 2), "AIC(2) >= AIC(1)");
  return o;
}

Outcome grid_search() {
  Outcome o;
  auto pool = synthetic::valid_pool(60);
  auto data = build_balanced_dataset(pool, 5);
  synthetic::BoostBackend inner(pool, 0.4, 0.02);
  CountingBackend counted(&inner, nullptr);
  ScoringContext ctx;
  ctx.masked = &counted;
  std::vector<PmiComponents> comps;
  for (const auto& d : data) comps.push_back(estimate_triple(d.triple, GenerationMode::kConcat, ctx).components);
  const auto calls_before = counted.masked_calls();

  LambdaGrid grid;  // 90 points over [0.5, 5.0]
  auto result = tune_lambda_grid(comps, grid, 1, {}, 4);
  o.expect(counted.masked_calls() == calls_before, "backend called during recombination");
  o.expect(result.grid.size() == 90 && result.grid.front().lambda == 0.5 && result.grid.back().lambda == 5.0,
           "grid shape");

  double best_aic = INFINITY, best_lambda = 0;
  for (double lambda : grid.values()) {
    std::vector<double> xs;
    for (const auto& c : comps) {
      xs.push_back(((lambda * c.cond_tail - c.marg_tail) + (lambda * c.cond_head - c.marg_head)) / 2);
    }
    double a;
    try {
      a = aic(fit_gmm_em(xs, 1));
    } catch (const DataError&) {
      continue;
    }
    if (a < best_aic) {
      best_aic = a;
      best_lambda = lambda;
    }
  }
  o.expect(result.best_lambda == best_lambda,
           "search " + std::to_string(result.best_lambda) + " vs brute force " + std::to_string(best_lambda));
  return o;
}

Outcome task1_synthetic() {
  Outcome o;
  auto pool = synthetic::valid_pool(100);
  auto data = build_balanced_dataset(pool, 2024);
  synthetic::BoostBackend masked(pool);
  ScoringContext ctx;
  ctx.masked = &masked;
  RunConfig cfg;
  cfg.mode = GenerationMode::kConcat;
  cfg.seed = 1;
  cfg.workers = 4;
  auto report = run_task1(cfg, data, ctx);
  o.expect(data.size() == 200, "dataset size");
  o.expect(report.f1 && *report.f1 >= 0.95, "F1 " + std::to_string(report.f1.value_or(-1)));
  if (o.ok) o.detail = "F1 " + format_fixed(*report.f1) + " lambda " + format_fixed(report.lambda);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  auto dir = std::filesystem::temp_directory_path() / "tmine_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto pool = synthetic::valid_pool(40);
  auto data = build_balanced_dataset(pool, 11);

  auto run = [&](const std::string& tag) {
    synthetic::BoostBackend masked(pool);
    FunctionBackend causal(nullptr, [](const WordSeq& s) {
      return -0.5 * static_cast<double>(s.size()) - 0.001 * static_cast<double>(synthetic::fnv1a(join_words(s)) % 100);
    });
    ScoreCache cache(dir / "scores.cache");
    CachedMaskedScorer cm(masked, cache);
    CachedCausalScorer cc(causal, cache);
    ScoringContext ctx;
    ctx.masked = &cm;
    ctx.causal = &cc;
    RunConfig cfg;
    cfg.seed = 3;
    cfg.workers = 4;
    cfg.mode = GenerationMode::kConcat;
    auto classify = run_task1(cfg, data, ctx);
    cfg.mode = GenerationMode::kCoherency;
    auto mine = run_task2(cfg, pool, 100, ctx);
    export_report(classify, dir / ("classify_" + tag + ".tsv"), ExportFormat::kTsv);
    export_report(classify, dir / ("classify_" + tag + ".json"), ExportFormat::kJson);
    export_report(mine, dir / ("mine_" + tag + ".tsv"), ExportFormat::kTsv);
    export_report(mine, dir / ("mine_" + tag + ".json"), ExportFormat::kJson);
    return cache.hits();
  };
  run("cold");
  auto hits_a = run("warm1");
  run("warm2");
  o.expect(hits_a > 0, "cache was not warm");
  for (const char* name : {"classify", "mine"}) {
    for (const char* ext : {".tsv", ".json"}) {
      auto a = slurp(dir / (std::string(name) + "_warm1" + ext));
      auto b = slurp(dir / (std::string(name) + "_warm2" + ext));
      auto c = slurp(dir / (std::string(name) + "_cold" + ext));
      o.expect(!a.empty() && a == b && a == c, std::string(name) + ext + " differs");
    }
  }
  std::filesystem::remove_all(dir);
  return o;
}

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"sentence-generation golden fixtures", 1.0, golden_sentences},
      {"coherency ranking of musician candidates", 1.0, musician_coherency},
      {"greedy PMI matches brute-force oracle", 1.0, greedy_oracle},
      {"PMI algebra (context-free zero, affine in lambda)", 1.0, pmi_algebra},
      {"GMM/EM planted clusters, monotone EM, AIC", 5.0, gmm_em},
      {"lambda grid search equals brute-force min-AIC", 30.0, grid_search},
      {"end-to-end synthetic Task 1 F1 >= 0.95", 60.0, task1_synthetic},
      {"determinism of exports with warm cache", 60.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && secs > c.limit_seconds) {
      o.ok = false;
      o.detail = "took " + std::to_string(secs) + "s, limit " + std::to_string(c.limit_seconds) + "s";
    }
    std::printf("%s  %-52s %.3fs%s%s\n", o.ok ? "PASS" : "FAIL", c.name.c_str(), secs,
                o.detail.empty() ? "" : "  ", o.detail.c_str());
    failed += !o.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
