#pragma once

#include <vector>

#include "tmine/backend.hpp"
#include "tmine/sentence_gen.hpp"

namespace tmine {

struct CoherencyOptions {
  // Rank by log-likelihood per word instead of the raw total.
  bool length_normalize = false;
  std::size_t workers = 1;
};

struct RankedCandidates {
  CandidateSentence best;
  std::vector<CandidateSentence> all;  // best first
};

// Scores every candidate once with the causal model and sorts descending.
// Ties: lower template ordinal, then fewer transforms, then text order.
RankedCandidates select_best(std::vector<CandidateSentence> candidates, CausalScorer& scorer,
                             const CoherencyOptions& options = {});

}  // namespace tmine
