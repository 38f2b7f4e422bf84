#include <algorithm>
#include <set>

#include "doctest.h"
#include "synthetic.hpp"
#include "tmine/errors.hpp"
#include "tmine/pipeline.hpp"

using namespace tmine;

namespace {
Triple T(const std::string& h, const std::string& r, const std::string& t) {
  return {normalize_surface(h), r, normalize_surface(t), std::nullopt};
}
}  // namespace

TEST_CASE("uniform_index stays in range and is seed-deterministic") {
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    auto x = uniform_index(a, 7);
    CHECK(x < 7);
    CHECK(x == uniform_index(b, 7));
  }
  CHECK_THROWS_AS(uniform_index(a, 0), std::invalid_argument);
}

TEST_CASE("negative sampling") {
  std::vector<Triple> pool = {T("ferret", "AtLocation", "pet store"),
                              T("musician", "CapableOf", "play musical instrument")};
  auto negs = sample_negatives(pool, 1);
  REQUIRE(negs.size() == 2);
  for (std::size_t i = 0; i < negs.size(); ++i) {
    CHECK_FALSE(negs[i].label);
    for (const auto& v : pool) CHECK_FALSE(negs[i].triple.same_content(v));
    // exactly one element differs from the source
    int diffs = (negs[i].triple.head != pool[i].head) + (negs[i].triple.relation != pool[i].relation) +
                (negs[i].triple.tail != pool[i].tail);
    CHECK(diffs == 1);
  }
  CHECK(sample_negatives(pool, 1) == negs);
  CHECK_THROWS_AS(sample_negatives({pool[0]}, 1), SamplingError);
  CHECK_THROWS_AS(sample_negatives({pool[0], pool[0]}, 1), SamplingError);

  auto big = synthetic::valid_pool(100);
  auto many = sample_negatives(big, 7);
  CHECK(many.size() == 100);
  std::set<std::tuple<WordSeq, std::string, WordSeq>> valid;
  for (const auto& t : big) valid.insert({t.head, t.relation, t.tail});
  for (const auto& n : many) CHECK_FALSE(valid.contains({n.triple.head, n.triple.relation, n.triple.tail}));
  CHECK(many[0].triple.source_id == "V0:neg");
}

TEST_CASE("balanced dataset and stratified sample") {
  auto pool = synthetic::valid_pool(12);
  auto data = build_balanced_dataset(pool, 3);
  CHECK(data.size() == 24);
  CHECK(std::count_if(data.begin(), data.end(), [](const auto& d) { return d.label; }) == 12);

  auto strat = stratified_sample(pool, 1, 9);
  CHECK(strat.size() == 6);  // six relations in the pool
  std::set<std::string> rels;
  for (const auto& t : strat) rels.insert(t.relation);
  CHECK(rels.size() == 6);
  CHECK(stratified_sample(pool, 1, 9) == strat);
  CHECK(stratified_sample(pool, 100, 9) == pool);
}

TEST_CASE("synthetic task 1 separates valid from invalid") {
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
  REQUIRE(report.f1);
  CHECK(*report.f1 >= 0.95);
  CHECK(report.grid.size() == 90);
  CHECK(report.rows.size() == 200);

  cfg.lambda = 1.0;
  auto fixed = run_task1(cfg, data, ctx);
  CHECK(fixed.lambda == 1.0);
  CHECK(fixed.grid.empty());
}

TEST_CASE("task 1 needs both labels and a masked backend") {
  auto pool = synthetic::valid_pool(4);
  std::vector<LabeledTriple> only_valid;
  for (const auto& t : pool) only_valid.push_back({t, true});
  synthetic::BoostBackend masked(pool);
  ScoringContext ctx;
  ctx.masked = &masked;
  RunConfig cfg;
  cfg.mode = GenerationMode::kConcat;
  CHECK_THROWS_AS(run_task1(cfg, only_valid, ctx), DataError);
  ScoringContext empty;
  CHECK_THROWS_AS(run_task2(cfg, pool, 10, empty), ConfigError);
  cfg.mode = GenerationMode::kCoherency;
  CHECK_THROWS_AS(run_task2(cfg, pool, 10, ctx), ConfigError);
}

TEST_CASE("task 2 ranks descending with input order on ties") {
  auto pool = synthetic::valid_pool(6);
  std::vector<Triple> candidates = {pool[0], T("zzzob", "AtLocation", "qqqob"), pool[1],
                                    T("zyyob", "UsedFor", "qyyob")};
  synthetic::BoostBackend masked({pool[0], pool[1]}, 0.5, 0.01);
  ScoringContext ctx;
  ctx.masked = &masked;
  RunConfig cfg;
  cfg.mode = GenerationMode::kConcat;
  auto report = run_task2(cfg, candidates, 100, ctx);
  CHECK(report.lambda == 4.0);
  REQUIRE(report.rows.size() == 4);
  for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
    CHECK(report.rows[i].pmi.value >= report.rows[i + 1].pmi.value);
    CHECK(report.rows[i].rank == i + 1);
  }
  CHECK(run_task2(cfg, candidates, 2, ctx).rows.size() == 2);

  // identical scores keep input order
  UniformBackend flat(50);
  ctx.masked = &flat;
  auto tied = run_task2(cfg, candidates, 100, ctx);
  for (std::size_t i = 0; i < candidates.size(); ++i) CHECK(tied.rows[i].triple == candidates[i]);
}

TEST_CASE("task 2 records per-triple data failures") {
  auto tmpl = TemplateRegistry::from_json(R"({"AtLocation": ["{0} in {1}"]})");
  UniformBackend flat(50);
  ScoringContext ctx;
  ctx.masked = &flat;
  ctx.registry = &tmpl;
  RunConfig cfg;
  cfg.mode = GenerationMode::kTemplate;
  std::vector<Triple> c = {T("a", "AtLocation", "b"), T("a", "IsA", "b")};
  auto report = run_task2(cfg, c, 10, ctx);
  CHECK(report.rows.size() == 1);
  CHECK(report.failures.size() == 1);
}

TEST_CASE("template mode equals coherency mode on a degenerate registry") {
  // one template per relation and adverb-like words that admit no transform
  auto reg = TemplateRegistry::from_json(R"({"AtLocation": ["{0} lives near {1}"], "UsedFor": ["{0} helps {1}"]})");
  std::vector<Triple> triples = {T("quickly", "AtLocation", "slowly"), T("gently", "UsedFor", "softly"),
                                 T("loudly", "AtLocation", "gently"), T("softly", "UsedFor", "quickly")};
  std::vector<LabeledTriple> data;
  for (std::size_t i = 0; i < triples.size(); ++i) data.push_back({triples[i], i % 2 == 0});
  FunctionBackend fb(
      [](const WordSeq& tokens, std::size_t pos, const std::string& tok) {
        return -0.1 - 0.01 * static_cast<double>(synthetic::fnv1a(join_words(tokens) + tok) % 97) -
               0.001 * static_cast<double>(pos);
      },
      [](const WordSeq& s) { return -1.0 * static_cast<double>(s.size()); });
  ScoringContext ctx;
  ctx.masked = &fb;
  ctx.causal = &fb;
  ctx.registry = &reg;
  RunConfig cfg;
  cfg.lambda = 1.5;
  cfg.mode = GenerationMode::kTemplate;
  auto a = run_task1(cfg, data, ctx);
  cfg.mode = GenerationMode::kCoherency;
  auto b = run_task1(cfg, data, ctx);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].sentence.str() == b.rows[i].sentence.str());
    CHECK(a.rows[i].pmi.value == b.rows[i].pmi.value);
    CHECK(a.rows[i].predicted == b.rows[i].predicted);
  }
  CHECK(a.f1 == b.f1);
}

TEST_CASE("scores are recomputable from components") {
  auto pool = synthetic::valid_pool(10);
  synthetic::BoostBackend masked(pool);
  ScoringContext ctx;
  ctx.masked = &masked;
  RunConfig cfg;
  cfg.mode = GenerationMode::kConcat;
  cfg.lambda = 2.5;
  auto report = run_scoring(cfg, pool, ctx);
  for (const auto& row : report.rows) CHECK(row.pmi.value == row.pmi.components.combine(2.5));
}
