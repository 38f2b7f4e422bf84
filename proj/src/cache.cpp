#include "tmine/cache.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "json.hpp"

#include "tmine/errors.hpp"

namespace tmine {

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string encode_values(const std::vector<double>& values) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%a", values[i]);
    if (i) out.push_back(' ');
    out += buf;
  }
  return out;
}

std::optional<std::vector<double>> decode_values(const std::string& text) {
  std::vector<double> out;
  const char* p = text.c_str();
  while (*p) {
    while (*p == ' ') ++p;
    if (!*p) break;
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) return std::nullopt;
    out.push_back(v);
    p = end;
  }
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace

std::string cache_key(const MaskedQuery& query, std::string_view model_tag) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : query.targets()) targets.push_back({t.position, t.token});
  nlohmann::json canon = {"masked", model_tag, query.tokens(), targets};
  return sha256_hex(canon.dump());
}

std::string cache_key(const WordSeq& sentence, std::string_view model_tag) {
  nlohmann::json canon = {"causal", model_tag, sentence};
  return sha256_hex(canon.dump());
}

// ---- ScoreCache ----

ScoreCache::ScoreCache(std::filesystem::path file) : path_(std::move(file)) {
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  std::optional<std::uintmax_t> complete_bytes;
  if (std::ifstream in(*path_, std::ios::binary); in) {
    std::string line;
    std::uintmax_t consumed = 0;
    while (std::getline(in, line)) {
      // A record without its newline is a torn trailing write; drop it.
      if (in.eof()) {
        if (!line.empty()) complete_bytes = consumed;
        break;
      }
      consumed += line.size() + 1;
      auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      auto values = decode_values(line.substr(tab + 1));
      if (!values) continue;
      entries_.emplace(line.substr(0, tab), std::move(*values));
    }
  }
  if (complete_bytes) std::filesystem::resize_file(*path_, *complete_bytes);
  out_.open(*path_, std::ios::app | std::ios::binary);
  if (!out_) throw ConfigError("cannot open cache file " + path_->string());
}

std::optional<std::vector<double>> ScoreCache::get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

bool ScoreCache::put(const std::string& key, const std::vector<double>& values) {
  std::unique_lock lock(mu_);
  if (!entries_.emplace(key, values).second) return false;
  if (out_.is_open()) {
    out_ << key << '\t' << encode_values(values) << '\n';
    out_.flush();
  }
  return true;
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::size_t ScoreCache::hits() const { return hits_.load(); }

std::size_t ScoreCache::misses() const { return misses_.load(); }

// ---- cached scorers ----

CachedMaskedScorer::CachedMaskedScorer(MaskedScorer& inner, ScoreCache& cache)
    : inner_(inner), cache_(cache), tag_(inner.model_tag()) {}

std::vector<double> CachedMaskedScorer::masked_logprobs(const MaskedQuery& query) {
  auto key = cache_key(query, tag_);
  if (auto hit = cache_.get(key)) return *hit;
  auto values = inner_.masked_logprobs(query);
  cache_.put(key, values);
  return values;
}

CachedCausalScorer::CachedCausalScorer(CausalScorer& inner, ScoreCache& cache)
    : inner_(inner), cache_(cache), tag_(inner.model_tag()) {}

double CachedCausalScorer::causal_log_likelihood(const WordSeq& sentence) {
  auto key = cache_key(sentence, tag_);
  if (auto hit = cache_.get(key)) return hit->front();
  double value = inner_.causal_log_likelihood(sentence);
  cache_.put(key, {value});
  return value;
}

}  // namespace tmine
