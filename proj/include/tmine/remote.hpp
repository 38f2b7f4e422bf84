#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

#include "json.hpp"

#include "tmine/backend.hpp"

namespace tmine {

struct BackendInfo {
  std::string model_tag;
  std::size_t max_tokens = kDefaultMaxTokens;
};

struct RemoteOptions {
  std::size_t max_inflight = 8;  // at most 1024
  int retries = 3;
  std::chrono::milliseconds backoff{100};
  std::chrono::seconds timeout{120};
};

// Client for the JSON-over-HTTP scoring protocol:
//   POST /causal {"tokens": [...]}                      -> {"loglik": x}
//   POST /masked {"tokens": [...], "targets": [{"pos", "token"}]} -> {"logprobs": [...]}
//   POST /info                                          -> {"model_tag", "max_tokens"}
// 400 responses become QueryError; connection failures and 503 are retried,
// then reported as TransportError.
class RemoteBackend final : public MaskedScorer, public CausalScorer {
 public:
  explicit RemoteBackend(std::string endpoint, RemoteOptions options = {});

  BackendInfo info() const;
  std::vector<double> masked_logprobs(const MaskedQuery& query) override;
  double causal_log_likelihood(const WordSeq& sentence) override;
  std::string model_tag() const override;

  const std::string& endpoint() const { return endpoint_; }

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  void check_length(const WordSeq& tokens);

  std::string endpoint_;
  RemoteOptions options_;
  mutable std::counting_semaphore<1024> slots_;
  mutable std::mutex info_mu_;
  mutable std::optional<BackendInfo> info_;
};

}  // namespace tmine
