#include "tmine/coherency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "tmine/errors.hpp"
#include "tmine/parallel.hpp"

namespace tmine {

RankedCandidates select_best(std::vector<CandidateSentence> candidates, CausalScorer& scorer,
                             const CoherencyOptions& options) {
  if (candidates.empty()) throw std::invalid_argument("select_best: no candidates");

  parallel_for(candidates.size(), options.workers, [&](std::size_t i) {
    auto& c = candidates[i];
    double ll = 0.0;
    try {
      ll = scorer.causal_log_likelihood(c.text);
    } catch (const BackendError&) {
      rethrow_backend_error("scoring candidate '" + c.str() + "'");
    }
    if (!std::isfinite(ll)) throw BackendError("non-finite log-likelihood for '" + c.str() + "'");
    c.coherency_loglik = ll;
  });

  auto rank_score = [&](const CandidateSentence& c) {
    double ll = *c.coherency_loglik;
    return options.length_normalize ? ll / static_cast<double>(c.text.size()) : ll;
  };
  auto ordinal = [](const CandidateSentence& c) {
    return c.template_id ? c.template_id->ordinal : std::size_t{0};
  };
  std::sort(candidates.begin(), candidates.end(),
            [&](const CandidateSentence& a, const CandidateSentence& b) {
              double sa = rank_score(a), sb = rank_score(b);
              if (sa != sb) return sa > sb;
              return std::forward_as_tuple(ordinal(a), a.transform_count(), a.text) <
                     std::forward_as_tuple(ordinal(b), b.transform_count(), b.text);
            });

  RankedCandidates out;
  out.best = candidates.front();
  out.all = std::move(candidates);
  return out;
}

}  // namespace tmine
