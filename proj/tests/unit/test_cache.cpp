#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "tmine/cache.hpp"

using namespace tmine;

namespace {
std::filesystem::path temp_file(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tmine_test_" + name);
  std::filesystem::remove(p);
  return p;
}
}  // namespace

TEST_CASE("cache keys") {
  MaskedQuery q({"a", "[MASK]", "[MASK]"}, {{1, "b"}, {2, "c"}});
  CHECK(cache_key(q, "m") == cache_key(q, "m"));
  CHECK(cache_key(q, "m").size() == 64);
  CHECK(cache_key(q, "m") != cache_key(q, "n"));
  MaskedQuery shifted({"[MASK]", "b", "[MASK]"}, {{0, "a"}, {2, "c"}});
  CHECK(cache_key(q, "m") != cache_key(shifted, "m"));
  CHECK(cache_key(WordSeq{"a", "b"}, "m") != cache_key(WordSeq{"a b"}, "m"));
  // sha256 of the canonical encoding is stable across runs and platforms
  CHECK(cache_key(WordSeq{"x"}, "t") == cache_key(WordSeq{"x"}, "t"));
}

TEST_CASE("file persistence is bit exact") {
  auto path = temp_file("persist.tsv");
  std::vector<double> values = {std::log(0.1), -1e-300, 0.1 + 0.2, -0.0};
  {
    ScoreCache c(path);
    CHECK(c.put("k1", values));
    CHECK_FALSE(c.put("k1", {1.0}));
  }
  ScoreCache again(path);
  CHECK(again.size() == 1);
  auto got = again.get("k1");
  REQUIRE(got);
  REQUIRE(got->size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(std::memcmp(&(*got)[i], &values[i], sizeof(double)) == 0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("torn trailing record is ignored") {
  auto path = temp_file("torn.tsv");
  {
    ScoreCache c(path);
    c.put("good", {0.5});
  }
  {
    std::ofstream out(path, std::ios::app);
    out << "partial\t0x1.";
  }
  {
    ScoreCache c(path);
    CHECK(c.size() == 1);
    CHECK(c.get("good"));
    c.put("next", {0.25});
  }
  ScoreCache c(path);
  CHECK(c.size() == 2);
  CHECK(c.get("next") == std::vector<double>{0.25});
  std::filesystem::remove(path);
}

TEST_CASE("cached scorers match the inner scorer and avoid repeat calls") {
  std::mt19937 rng(3);
  FunctionBackend inner(
      [](const WordSeq& tokens, std::size_t pos, const std::string& tok) {
        return -0.01 * static_cast<double>(tok.size() + pos + tokens.size()) - 1e-3;
      },
      [](const WordSeq& s) { return -0.37 * static_cast<double>(s.size()); });
  CountingBackend counted(&inner, &inner);
  ScoreCache cache;
  CachedMaskedScorer m(counted, cache);
  CachedCausalScorer c(counted, cache);
  for (int i = 0; i < 50; ++i) {
    std::size_t n = 2 + rng() % 4;
    WordSeq tokens(n, "w");
    tokens[0] = "[MASK]";
    MaskedQuery q(tokens, {{0, "tok" + std::to_string(rng() % 3)}});
    CHECK(m.masked_logprobs(q) == inner.masked_logprobs(q));
    CHECK(c.causal_log_likelihood(tokens) == inner.causal_log_likelihood(tokens));
  }
  auto calls = counted.masked_calls();
  MaskedQuery q({"[MASK]", "w"}, {{0, "tok0"}});
  m.masked_logprobs(q);
  m.masked_logprobs(q);
  CHECK(counted.masked_calls() <= calls + 1);
  CHECK(cache.hits() > 0);
}
