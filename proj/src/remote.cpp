#include "tmine/remote.hpp"

#include <algorithm>
#include <thread>

#include "httplib.h"

#include "tmine/errors.hpp"

namespace tmine {

RemoteBackend::RemoteBackend(std::string endpoint, RemoteOptions options)
    : endpoint_(std::move(endpoint)),
      options_(options),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options.max_inflight, 1, 1024))) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  if (endpoint_.empty()) throw ConfigError("remote backend needs an endpoint");
}

nlohmann::json RemoteBackend::post(const std::string& path, const nlohmann::json& body) const {
  const std::string payload = body.dump();
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.backoff * attempt);

    slots_.acquire();
    httplib::Result res = [&] {
      httplib::Client client(endpoint_);
      client.set_connection_timeout(options_.timeout);
      client.set_read_timeout(options_.timeout);
      client.set_write_timeout(options_.timeout);
      return client.Post(path, payload, "application/json");
    }();
    slots_.release();

    if (!res) {
      last_error = "request to " + endpoint_ + path + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw TransportError(endpoint_ + path + ": malformed response: " + e.what());
      }
    }
    std::string message = res->body;
    try {
      auto err = nlohmann::json::parse(res->body);
      if (err.contains("error")) message = err.at("error").get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
    if (res->status == 400) throw QueryError(endpoint_ + path + ": " + message);
    last_error = endpoint_ + path + ": HTTP " + std::to_string(res->status) + ": " + message;
    if (res->status != 503 && res->status < 500) break;
  }
  throw TransportError(last_error);
}

BackendInfo RemoteBackend::info() const {
  {
    std::lock_guard lock(info_mu_);
    if (info_) return *info_;
  }
  auto doc = post("/info", nlohmann::json::object());
  BackendInfo info;
  try {
    info.model_tag = doc.at("model_tag").get<std::string>();
    info.max_tokens = doc.at("max_tokens").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(endpoint_ + "/info: malformed response: " + e.what());
  }
  std::lock_guard lock(info_mu_);
  info_ = info;
  return info;
}

void RemoteBackend::check_length(const WordSeq& tokens) {
  auto cap = info().max_tokens;
  if (tokens.size() > cap) {
    throw LengthError("sequence of " + std::to_string(tokens.size()) + " words exceeds cap of " +
                      std::to_string(cap));
  }
}

std::vector<double> RemoteBackend::masked_logprobs(const MaskedQuery& query) {
  check_length(query.tokens());
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : query.targets()) targets.push_back({{"pos", t.position}, {"token", t.token}});
  auto doc = post("/masked", {{"tokens", query.tokens()}, {"targets", targets}});
  std::vector<double> out;
  try {
    out = doc.at("logprobs").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(endpoint_ + "/masked: malformed response: " + e.what());
  }
  if (out.size() != query.targets().size()) {
    throw TransportError(endpoint_ + "/masked: expected " + std::to_string(query.targets().size()) +
                         " logprobs, got " + std::to_string(out.size()));
  }
  return out;
}

double RemoteBackend::causal_log_likelihood(const WordSeq& sentence) {
  if (sentence.empty()) throw std::invalid_argument("causal_log_likelihood: empty sentence");
  check_length(sentence);
  auto doc = post("/causal", {{"tokens", sentence}});
  try {
    return doc.at("loglik").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(endpoint_ + "/causal: malformed response: " + e.what());
  }
}

std::string RemoteBackend::model_tag() const {
  return info().model_tag;
}

}  // namespace tmine
