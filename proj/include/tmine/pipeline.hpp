#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tmine/backend.hpp"
#include "tmine/cluster.hpp"
#include "tmine/coherency.hpp"
#include "tmine/core.hpp"
#include "tmine/morpho.hpp"
#include "tmine/pmi.hpp"
#include "tmine/sentence_gen.hpp"

namespace tmine {

inline constexpr double kDefaultMiningLambda = 4.0;

struct BackendDescriptor {
  enum class Kind { kLookup, kRemote };
  Kind kind = Kind::kLookup;
  std::optional<std::string> endpoint;
  std::string model_tag;
};

struct RunConfig {
  GenerationMode mode = GenerationMode::kCoherency;
  // Fixed weight. Classification searches `grid` when this is empty.
  std::optional<double> lambda;
  LambdaGrid grid;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool length_normalize = false;
  EmOptions em;
};

// What a run scores with. registry and grammar default to the bundled data.
struct ScoringContext {
  MaskedScorer* masked = nullptr;
  CausalScorer* causal = nullptr;  // required for coherency mode
  const TemplateRegistry* registry = &TemplateRegistry::bundled();
  const Grammar* grammar = &Grammar::bundled();
};

struct ScoredTriple {
  Triple triple;
  CandidateSentence sentence;
  PmiScore pmi;
  std::optional<std::size_t> rank;  // mining only, 1-based
  std::optional<bool> label;        // gold label, classification only
  std::optional<bool> predicted;
};

enum class ReportKind { kScore, kClassify, kMine };

struct Report {
  ReportKind kind = ReportKind::kScore;
  GenerationMode mode = GenerationMode::kConcat;
  double lambda = 1.0;
  std::optional<double> f1;
  std::vector<GridPoint> grid;
  std::vector<ScoredTriple> rows;
  std::vector<std::pair<Triple, std::string>> failures;
};

// Portable uniform draw in [0, n) from a 64-bit Mersenne Twister.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

// One negative per valid triple: pick head, relation or tail uniformly and
// swap in that element from another triple of the pool. Negatives never
// equal their source nor any triple of the pool.
std::vector<LabeledTriple> sample_negatives(const std::vector<Triple>& valid, std::uint64_t seed);

// valid (label true) followed by sample_negatives(valid, seed).
std::vector<LabeledTriple> build_balanced_dataset(const std::vector<Triple>& valid,
                                                  std::uint64_t seed);

// At most per_relation triples of each relation, input order preserved.
std::vector<Triple> stratified_sample(const std::vector<Triple>& triples, std::size_t per_relation,
                                      std::uint64_t seed);

// Sentence for one triple under the given mode (coherency asks the causal model).
CandidateSentence generate_sentence(const Triple& triple, GenerationMode mode,
                                    const ScoringContext& ctx, bool length_normalize = false);

struct TripleEstimate {
  CandidateSentence sentence;
  PmiComponents components;
};

TripleEstimate estimate_triple(const Triple& triple, GenerationMode mode, const ScoringContext& ctx,
                               bool length_normalize = false);

// Fixed-lambda scoring of every triple, input order. Per-triple data errors
// are recorded as failures; backend errors abort.
Report run_scoring(const RunConfig& config, const std::vector<Triple>& triples,
                   const ScoringContext& ctx);

// Classification: score, pick lambda (grid/AIC unless fixed), cluster with a
// two-component mixture, label the higher-mean cluster valid, report F1.
Report run_task1(const RunConfig& config, const std::vector<LabeledTriple>& data,
                 const ScoringContext& ctx);

// Mining: score with a fixed lambda (default 4), sort descending (input
// order on ties), keep top_k. Triples that fail on data errors are skipped.
Report run_task2(const RunConfig& config, const std::vector<Triple>& candidates, std::size_t top_k,
                 const ScoringContext& ctx);

}  // namespace tmine
