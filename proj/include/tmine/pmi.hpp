#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tmine/backend.hpp"
#include "tmine/sentence_gen.hpp"

namespace tmine {

enum class SpanTarget { kHead, kTail };

// kOtherSpan keeps the non-target span masked for the whole procedure,
// which turns the conditional estimate into the marginal one.
enum class KeepMasked { kNone, kOtherSpan };

// A selected sentence with the maskable entity positions marked.
struct SpanRoles {
  WordSeq sentence_tokens;
  std::vector<std::size_t> head_positions;
  std::vector<std::size_t> tail_positions;

  // Throws std::invalid_argument on empty, out-of-range or overlapping spans.
  void validate() const;
};

struct GreedyStep {
  std::size_t position = 0;
  std::string token;
  double logprob = 0.0;
  bool operator==(const GreedyStep&) const = default;
};

struct GreedyTrace {
  std::vector<GreedyStep> steps;  // commit order
  double total_loglik = 0.0;
};

// The four directional log-likelihoods. Everything else is recombination.
struct PmiComponents {
  double cond_tail = 0.0;
  double marg_tail = 0.0;
  double cond_head = 0.0;
  double marg_head = 0.0;

  // ((lambda*cond_tail - marg_tail) + (lambda*cond_head - marg_head)) / 2
  double combine(double lambda) const;
};

struct PmiScore {
  PmiComponents components;
  double lambda = 1.0;
  double value = 0.0;
};

PmiScore make_pmi_score(const PmiComponents& components, double lambda);

// Greedy unmasking: mask every target position, then repeatedly commit the
// still-masked position whose true word is most probable (lowest position on
// ties) until all are committed. total_loglik sums the committed logprobs.
GreedyTrace greedy_span_loglik(const SpanRoles& roles, SpanTarget target, KeepMasked keep_masked,
                               MaskedScorer& scorer);

// Conditional and marginal estimates in both directions (four traces).
PmiComponents estimate_components(const SpanRoles& roles, MaskedScorer& scorer);

PmiScore score_pmi(const SpanRoles& roles, double lambda, MaskedScorer& scorer);

// Maps a rendered sentence back to entity positions using its slot offsets.
// Inserted articles stay visible; only entity words are maskable.
SpanRoles locate_spans(const CandidateSentence& sentence);

}  // namespace tmine
