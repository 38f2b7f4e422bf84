#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tmine/core.hpp"

namespace tmine {

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::size_t kDefaultMaxTokens = 128;

struct MaskTarget {
  std::size_t position = 0;
  std::string token;
  bool operator==(const MaskTarget&) const = default;
};

// A word-level sentence with some positions replaced by kMaskToken, plus the
// true words whose probability is wanted at masked positions.
class MaskedQuery {
 public:
  // Throws std::invalid_argument unless every target sits on a masked,
  // in-bounds position and there is at least one target.
  MaskedQuery(WordSeq tokens, std::vector<MaskTarget> targets);

  const WordSeq& tokens() const { return tokens_; }
  const std::vector<MaskTarget>& targets() const { return targets_; }
  // The tokens joined by single spaces, masks included. Keys lookup tables.
  std::string context_key() const { return join_words(tokens_); }

 private:
  WordSeq tokens_;
  std::vector<MaskTarget> targets_;
};

struct TokenProbability {
  std::size_t position = 0;
  std::string token;
  double logprob = 0.0;
  double prob() const;
};

// Bidirectional scorer. Returns natural-log probabilities, one per target,
// in target order. A masked word is scored as a whole word; any subword
// expansion happens behind this interface.
class MaskedScorer {
 public:
  virtual ~MaskedScorer() = default;
  virtual std::vector<double> masked_logprobs(const MaskedQuery& query) = 0;
  virtual std::string model_tag() const = 0;
};

// Autoregressive scorer: natural-log likelihood of the whole sequence.
class CausalScorer {
 public:
  virtual ~CausalScorer() = default;
  virtual double causal_log_likelihood(const WordSeq& sentence) = 0;
  virtual std::string model_tag() const = 0;
};

std::vector<TokenProbability> masked_probabilities(MaskedScorer& scorer, const MaskedQuery& query);

// Table-driven backend for tests and offline runs. Immutable after
// construction, so safe to call from many threads.
class LookupBackend final : public MaskedScorer, public CausalScorer {
 public:
  // Context "*" matches any sentence.
  static constexpr std::string_view kAnyContext = "*";

  struct MaskedKey {
    std::string context;
    std::size_t position = 0;
    std::string token;
    auto operator<=>(const MaskedKey&) const = default;
  };

  struct Options {
    std::optional<double> default_prob;     // masked misses
    std::optional<double> default_loglik;   // causal misses
    std::optional<std::set<std::string>> vocabulary;
    std::size_t max_tokens = kDefaultMaxTokens;
    std::string model_tag = "lookup";
  };

  LookupBackend(std::map<std::string, double> causal_table, std::map<MaskedKey, double> masked_table,
                Options options);

  std::vector<double> masked_logprobs(const MaskedQuery& query) override;
  double causal_log_likelihood(const WordSeq& sentence) override;
  std::string model_tag() const override { return options_.model_tag; }

  // Reads {"causal": {sentence: loglik}, "masked": [{"context", "pos", "token", "prob"}],
  // "default_prob", "default_loglik", "vocabulary", "model_tag"}.
  static LookupBackend from_json_file(const std::string& path);
  static LookupBackend from_json_text(std::string_view text, std::string model_tag);

 private:
  std::map<std::string, double> causal_;
  std::map<MaskedKey, double> masked_;
  Options options_;
};

// causal_table maps the space-joined sentence to its log-likelihood,
// masked_table maps (context key, position, token) to a probability in (0,1].
LookupBackend make_lookup_backend(std::map<std::string, double> causal_table,
                                  std::map<LookupBackend::MaskedKey, double> masked_table,
                                  std::optional<double> default_prob = std::nullopt);

// Every token has probability 1/vocab_size regardless of context.
class UniformBackend final : public MaskedScorer, public CausalScorer {
 public:
  explicit UniformBackend(std::size_t vocab_size, std::size_t max_tokens = kDefaultMaxTokens);
  std::vector<double> masked_logprobs(const MaskedQuery& query) override;
  double causal_log_likelihood(const WordSeq& sentence) override;
  std::string model_tag() const override;

 private:
  std::size_t vocab_size_;
  std::size_t max_tokens_;
};

// Adapts callables. masked_fn(tokens, position, token) returns a logprob.
// Thread safety is whatever the callables provide.
class FunctionBackend final : public MaskedScorer, public CausalScorer {
 public:
  using MaskedFn = std::function<double(const WordSeq&, std::size_t, const std::string&)>;
  using CausalFn = std::function<double(const WordSeq&)>;

  FunctionBackend(MaskedFn masked, CausalFn causal, std::string model_tag = "function");

  std::vector<double> masked_logprobs(const MaskedQuery& query) override;
  double causal_log_likelihood(const WordSeq& sentence) override;
  std::string model_tag() const override { return tag_; }

 private:
  MaskedFn masked_;
  CausalFn causal_;
  std::string tag_;
};

// Pass-through decorator that counts calls.
class CountingBackend final : public MaskedScorer, public CausalScorer {
 public:
  CountingBackend(MaskedScorer* masked, CausalScorer* causal) : masked_(masked), causal_(causal) {}

  std::vector<double> masked_logprobs(const MaskedQuery& query) override;
  double causal_log_likelihood(const WordSeq& sentence) override;
  std::string model_tag() const override;

  std::size_t masked_calls() const { return masked_calls_.load(); }
  std::size_t masked_targets() const { return masked_targets_.load(); }
  std::size_t causal_calls() const { return causal_calls_.load(); }

 private:
  MaskedScorer* masked_;
  CausalScorer* causal_;
  std::atomic<std::size_t> masked_calls_{0};
  std::atomic<std::size_t> masked_targets_{0};
  std::atomic<std::size_t> causal_calls_{0};
};

// Rethrows the in-flight backend exception with context prepended, keeping
// its concrete type. Must be called from inside a catch block.
[[noreturn]] void rethrow_backend_error(const std::string& context);

}  // namespace tmine
