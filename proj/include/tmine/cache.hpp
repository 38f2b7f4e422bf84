#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tmine/backend.hpp"

namespace tmine {

// SHA-256 hex digest over a canonical encoding of the query and model tag.
std::string cache_key(const MaskedQuery& query, std::string_view model_tag);
std::string cache_key(const WordSeq& sentence, std::string_view model_tag);

// Digest -> score vector, optionally backed by an append-only record file
// ("<digest>\t<hexfloat> <hexfloat> ...", one per line). Values survive the
// round trip bit for bit. Reads are concurrent; writes are serialized.
class ScoreCache {
 public:
  ScoreCache() = default;
  explicit ScoreCache(std::filesystem::path file);

  std::optional<std::vector<double>> get(const std::string& key) const;
  // Returns false and leaves the cache untouched if key is already present.
  bool put(const std::string& key, const std::vector<double>& values);
  std::size_t size() const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::vector<double>> entries_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

class CachedMaskedScorer final : public MaskedScorer {
 public:
  CachedMaskedScorer(MaskedScorer& inner, ScoreCache& cache);
  std::vector<double> masked_logprobs(const MaskedQuery& query) override;
  std::string model_tag() const override { return tag_; }

 private:
  MaskedScorer& inner_;
  ScoreCache& cache_;
  std::string tag_;
};

class CachedCausalScorer final : public CausalScorer {
 public:
  CachedCausalScorer(CausalScorer& inner, ScoreCache& cache);
  double causal_log_likelihood(const WordSeq& sentence) override;
  std::string model_tag() const override { return tag_; }

 private:
  CausalScorer& inner_;
  ScoreCache& cache_;
  std::string tag_;
};

}  // namespace tmine
