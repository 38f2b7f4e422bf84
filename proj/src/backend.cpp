#include "tmine/backend.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "tmine/errors.hpp"

namespace tmine {

namespace {

void check_length(const WordSeq& tokens, std::size_t max_tokens) {
  if (tokens.size() > max_tokens) {
    throw LengthError("sequence of " + std::to_string(tokens.size()) + " tokens exceeds cap of " +
                      std::to_string(max_tokens));
  }
}

void check_prob(double p, const std::string& where) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument(where + ": probability " + std::to_string(p) + " not in (0,1]");
  }
}

}  // namespace

MaskedQuery::MaskedQuery(WordSeq tokens, std::vector<MaskTarget> targets)
    : tokens_(std::move(tokens)), targets_(std::move(targets)) {
  if (targets_.empty()) throw std::invalid_argument("MaskedQuery: no targets");
  for (const auto& t : targets_) {
    if (t.position >= tokens_.size()) {
      throw std::invalid_argument("MaskedQuery: target position " + std::to_string(t.position) +
                                  " out of bounds");
    }
    if (tokens_[t.position] != kMaskToken) {
      throw std::invalid_argument("MaskedQuery: target position " + std::to_string(t.position) +
                                  " is not masked");
    }
  }
}

double TokenProbability::prob() const { return std::exp(logprob); }

std::vector<TokenProbability> masked_probabilities(MaskedScorer& scorer, const MaskedQuery& query) {
  auto logs = scorer.masked_logprobs(query);
  if (logs.size() != query.targets().size()) {
    throw BackendError("backend returned " + std::to_string(logs.size()) + " values for " +
                       std::to_string(query.targets().size()) + " targets");
  }
  std::vector<TokenProbability> out;
  out.reserve(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out.push_back({query.targets()[i].position, query.targets()[i].token, logs[i]});
  }
  return out;
}

// ---- LookupBackend ----

LookupBackend::LookupBackend(std::map<std::string, double> causal_table,
                             std::map<MaskedKey, double> masked_table, Options options)
    : causal_(std::move(causal_table)), masked_(std::move(masked_table)), options_(std::move(options)) {
  for (const auto& [key, p] : masked_) check_prob(p, "lookup table entry '" + key.token + "'");
  if (options_.default_prob) check_prob(*options_.default_prob, "lookup default");
  for (const auto& [sentence, ll] : causal_) {
    if (!std::isfinite(ll) || ll > 0.0) {
      throw std::invalid_argument("lookup causal entry '" + sentence + "' is not a log-probability");
    }
  }
}

std::vector<double> LookupBackend::masked_logprobs(const MaskedQuery& query) {
  check_length(query.tokens(), options_.max_tokens);
  const std::string context = query.context_key();
  std::vector<double> out;
  out.reserve(query.targets().size());
  for (const auto& target : query.targets()) {
    if (options_.vocabulary && !options_.vocabulary->contains(target.token)) {
      throw UnknownTokenError("token '" + target.token + "' is outside the vocabulary");
    }
    auto it = masked_.find({context, target.position, target.token});
    if (it == masked_.end()) {
      it = masked_.find({std::string(kAnyContext), target.position, target.token});
    }
    if (it != masked_.end()) {
      out.push_back(std::log(it->second));
    } else if (options_.default_prob) {
      out.push_back(std::log(*options_.default_prob));
    } else {
      throw MissingEntryError("no lookup entry for '" + target.token + "' at position " +
                              std::to_string(target.position) + " in '" + context + "'");
    }
  }
  return out;
}

double LookupBackend::causal_log_likelihood(const WordSeq& sentence) {
  if (sentence.empty()) throw std::invalid_argument("causal_log_likelihood: empty sentence");
  check_length(sentence, options_.max_tokens);
  auto key = join_words(sentence);
  if (auto it = causal_.find(key); it != causal_.end()) return it->second;
  if (options_.default_loglik) return *options_.default_loglik;
  throw MissingEntryError("no causal lookup entry for '" + key + "'");
}

LookupBackend LookupBackend::from_json_text(std::string_view text, std::string model_tag) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("lookup table: ") + e.what());
  }
  try {
    std::map<std::string, double> causal;
    if (doc.contains("causal")) {
      for (const auto& [sentence, ll] : doc.at("causal").items()) causal[sentence] = ll.get<double>();
    }
    std::map<MaskedKey, double> masked;
    if (doc.contains("masked")) {
      for (const auto& entry : doc.at("masked")) {
        MaskedKey key{entry.value("context", std::string(kAnyContext)),
                      entry.at("pos").get<std::size_t>(), entry.at("token").get<std::string>()};
        masked[key] = entry.at("prob").get<double>();
      }
    }
    Options options;
    options.model_tag = doc.value("model_tag", model_tag);
    if (doc.contains("default_prob")) options.default_prob = doc.at("default_prob").get<double>();
    if (doc.contains("default_loglik")) options.default_loglik = doc.at("default_loglik").get<double>();
    if (doc.contains("vocabulary")) {
      options.vocabulary = doc.at("vocabulary").get<std::set<std::string>>();
    }
    if (doc.contains("max_tokens")) options.max_tokens = doc.at("max_tokens").get<std::size_t>();
    return LookupBackend(std::move(causal), std::move(masked), std::move(options));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("lookup table: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("lookup table: ") + e.what());
  }
}

LookupBackend LookupBackend::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lookup table " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), "lookup:" + path);
}

LookupBackend make_lookup_backend(std::map<std::string, double> causal_table,
                                  std::map<LookupBackend::MaskedKey, double> masked_table,
                                  std::optional<double> default_prob) {
  LookupBackend::Options options;
  options.default_prob = default_prob;
  return LookupBackend(std::move(causal_table), std::move(masked_table), std::move(options));
}

// ---- UniformBackend ----

UniformBackend::UniformBackend(std::size_t vocab_size, std::size_t max_tokens)
    : vocab_size_(vocab_size), max_tokens_(max_tokens) {
  if (vocab_size == 0) throw std::invalid_argument("UniformBackend: vocab_size must be positive");
}

std::vector<double> UniformBackend::masked_logprobs(const MaskedQuery& query) {
  check_length(query.tokens(), max_tokens_);
  return std::vector<double>(query.targets().size(), std::log(1.0 / static_cast<double>(vocab_size_)));
}

double UniformBackend::causal_log_likelihood(const WordSeq& sentence) {
  if (sentence.empty()) throw std::invalid_argument("causal_log_likelihood: empty sentence");
  check_length(sentence, max_tokens_);
  return static_cast<double>(sentence.size()) * std::log(1.0 / static_cast<double>(vocab_size_));
}

std::string UniformBackend::model_tag() const { return "uniform:" + std::to_string(vocab_size_); }

// ---- FunctionBackend ----

FunctionBackend::FunctionBackend(MaskedFn masked, CausalFn causal, std::string model_tag)
    : masked_(std::move(masked)), causal_(std::move(causal)), tag_(std::move(model_tag)) {}

std::vector<double> FunctionBackend::masked_logprobs(const MaskedQuery& query) {
  if (!masked_) throw BackendError("function backend has no masked scorer");
  std::vector<double> out;
  out.reserve(query.targets().size());
  for (const auto& t : query.targets()) out.push_back(masked_(query.tokens(), t.position, t.token));
  return out;
}

double FunctionBackend::causal_log_likelihood(const WordSeq& sentence) {
  if (!causal_) throw BackendError("function backend has no causal scorer");
  if (sentence.empty()) throw std::invalid_argument("causal_log_likelihood: empty sentence");
  return causal_(sentence);
}

// ---- CountingBackend ----

std::vector<double> CountingBackend::masked_logprobs(const MaskedQuery& query) {
  ++masked_calls_;
  masked_targets_ += query.targets().size();
  return masked_->masked_logprobs(query);
}

double CountingBackend::causal_log_likelihood(const WordSeq& sentence) {
  ++causal_calls_;
  return causal_->causal_log_likelihood(sentence);
}

std::string CountingBackend::model_tag() const {
  return masked_ ? masked_->model_tag() : causal_->model_tag();
}

[[noreturn]] void rethrow_backend_error(const std::string& context) {
  try {
    throw;
  } catch (const TransportError& e) {
    throw TransportError(context + ": " + e.what());
  } catch (const LengthError& e) {
    throw LengthError(context + ": " + e.what());
  } catch (const UnknownTokenError& e) {
    throw UnknownTokenError(context + ": " + e.what());
  } catch (const MissingEntryError& e) {
    throw MissingEntryError(context + ": " + e.what());
  } catch (const QueryError& e) {
    throw QueryError(context + ": " + e.what());
  } catch (const BackendError& e) {
    throw BackendError(context + ": " + e.what());
  }
}

}  // namespace tmine
