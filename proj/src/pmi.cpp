#include "tmine/pmi.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "tmine/errors.hpp"

namespace tmine {

void SpanRoles::validate() const {
  auto check = [&](const std::vector<std::size_t>& positions, const char* name) {
    if (positions.empty()) throw std::invalid_argument(std::string("SpanRoles: empty ") + name);
    std::set<std::size_t> seen;
    for (auto p : positions) {
      if (p >= sentence_tokens.size()) {
        throw std::invalid_argument(std::string("SpanRoles: ") + name + " position out of range");
      }
      if (!seen.insert(p).second) {
        throw std::invalid_argument(std::string("SpanRoles: duplicate ") + name + " position");
      }
    }
  };
  check(head_positions, "head");
  check(tail_positions, "tail");
  for (auto p : head_positions) {
    if (std::find(tail_positions.begin(), tail_positions.end(), p) != tail_positions.end()) {
      throw std::invalid_argument("SpanRoles: head and tail overlap");
    }
  }
}

double PmiComponents::combine(double lambda) const {
  return ((lambda * cond_tail - marg_tail) + (lambda * cond_head - marg_head)) / 2.0;
}

PmiScore make_pmi_score(const PmiComponents& components, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  return {components, lambda, components.combine(lambda)};
}

GreedyTrace greedy_span_loglik(const SpanRoles& roles, SpanTarget target, KeepMasked keep_masked,
                               MaskedScorer& scorer) {
  roles.validate();
  const auto& targets = target == SpanTarget::kTail ? roles.tail_positions : roles.head_positions;
  const auto& other = target == SpanTarget::kTail ? roles.head_positions : roles.tail_positions;

  WordSeq tokens = roles.sentence_tokens;
  for (auto p : targets) tokens[p] = std::string(kMaskToken);
  if (keep_masked == KeepMasked::kOtherSpan) {
    for (auto p : other) tokens[p] = std::string(kMaskToken);
  }

  std::vector<std::size_t> pending(targets.begin(), targets.end());
  std::sort(pending.begin(), pending.end());

  GreedyTrace trace;
  for (std::size_t round = 0; !pending.empty(); ++round) {
    std::vector<MaskTarget> query_targets;
    for (auto p : pending) query_targets.push_back({p, roles.sentence_tokens[p]});
    std::vector<double> logs;
    try {
      logs = scorer.masked_logprobs(MaskedQuery(tokens, std::move(query_targets)));
    } catch (const BackendError&) {
      rethrow_backend_error("greedy round " + std::to_string(round + 1));
    }
    if (logs.size() != pending.size()) {
      throw BackendError("backend returned " + std::to_string(logs.size()) + " values for " +
                         std::to_string(pending.size()) + " targets");
    }
    // pending is ascending, so strict > keeps the lowest position on ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < logs.size(); ++i) {
      if (logs[i] > logs[best]) best = i;
    }
    if (!std::isfinite(logs[best])) {
      throw BackendError("non-finite log-probability in greedy round " + std::to_string(round + 1));
    }
    auto pos = pending[best];
    trace.steps.push_back({pos, roles.sentence_tokens[pos], logs[best]});
    trace.total_loglik += logs[best];
    tokens[pos] = roles.sentence_tokens[pos];
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return trace;
}

PmiComponents estimate_components(const SpanRoles& roles, MaskedScorer& scorer) {
  PmiComponents c;
  c.cond_tail = greedy_span_loglik(roles, SpanTarget::kTail, KeepMasked::kNone, scorer).total_loglik;
  c.marg_tail =
      greedy_span_loglik(roles, SpanTarget::kTail, KeepMasked::kOtherSpan, scorer).total_loglik;
  c.cond_head = greedy_span_loglik(roles, SpanTarget::kHead, KeepMasked::kNone, scorer).total_loglik;
  c.marg_head =
      greedy_span_loglik(roles, SpanTarget::kHead, KeepMasked::kOtherSpan, scorer).total_loglik;
  return c;
}

PmiScore score_pmi(const SpanRoles& roles, double lambda, MaskedScorer& scorer) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  return make_pmi_score(estimate_components(roles, scorer), lambda);
}

SpanRoles locate_spans(const CandidateSentence& sentence) {
  auto positions = [&](const SlotSpan& slot, const PhraseVariant& variant, const char* name) {
    if (slot.length != variant.words.size() || slot.start + slot.length > sentence.text.size() ||
        !std::equal(variant.words.begin(), variant.words.end(),
                    sentence.text.begin() + static_cast<std::ptrdiff_t>(slot.start))) {
      throw SpanNotFoundError(std::string(name) + " span not found in '" + sentence.str() + "'");
    }
    std::vector<std::size_t> out;
    for (auto i : variant.content_indices()) out.push_back(slot.start + i);
    if (out.empty()) {
      throw SpanNotFoundError(std::string(name) + " has no maskable words in '" + sentence.str() + "'");
    }
    return out;
  };
  SpanRoles roles{sentence.text, positions(sentence.head_slot, sentence.head_variant, "head"),
                  positions(sentence.tail_slot, sentence.tail_variant, "tail")};
  try {
    roles.validate();
  } catch (const std::invalid_argument& e) {
    throw SpanNotFoundError(e.what());
  }
  return roles;
}

}  // namespace tmine
