#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmine/core.hpp"
#include "tmine/morpho.hpp"

namespace tmine {

struct TemplateId {
  std::string relation;
  std::size_t ordinal = 0;
  auto operator<=>(const TemplateId&) const = default;
};

// One sentence pattern with a {0} (head) slot and a {1} (tail) slot. The
// pattern is kept verbatim; words are its lowercased tokenization.
class Template {
 public:
  // Throws ConfigError unless the pattern has exactly one standalone {0}
  // and one standalone {1}.
  static Template parse(std::string relation, std::size_t ordinal, std::string pattern);

  const TemplateId& id() const { return id_; }
  const std::string& relation() const { return id_.relation; }
  const std::string& pattern() const { return pattern_; }
  const WordSeq& words() const { return words_; }
  std::size_t head_slot() const { return head_slot_; }
  std::size_t tail_slot() const { return tail_slot_; }

 private:
  TemplateId id_;
  std::string pattern_;
  WordSeq words_;
  std::size_t head_slot_ = 0;
  std::size_t tail_slot_ = 0;
};

// Position of a substituted phrase inside a rendered sentence.
struct SlotSpan {
  std::size_t start = 0;
  std::size_t length = 0;
  bool operator==(const SlotSpan&) const = default;
};

struct CandidateSentence {
  WordSeq text;
  std::optional<TemplateId> template_id;
  PhraseVariant head_variant;
  PhraseVariant tail_variant;
  SlotSpan head_slot;
  SlotSpan tail_slot;
  std::optional<double> coherency_loglik;

  std::string str() const { return join_words(text); }
  std::size_t transform_count() const {
    return head_variant.applied.size() + tail_variant.applied.size();
  }
};

// relation -> ordered template list. Order is the file order and decides
// which template the deterministic modes use.
class TemplateRegistry {
 public:
  static TemplateRegistry from_json(std::string_view json_text);
  static TemplateRegistry load(const std::string& path);
  static const TemplateRegistry& bundled();

  bool contains(std::string_view relation) const;
  // Throws UnknownRelationError for relations outside the registry.
  const std::vector<Template>& templates_for(std::string_view relation) const;
  const std::vector<std::string>& relations() const { return order_; }
  RelationSet relation_set() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::vector<Template>, std::less<>> templates_;
};

enum class GenerationMode { kConcat, kTemplate, kTemplateGrammar, kCoherency };

std::string_view to_string(GenerationMode mode);
// Accepts concat, template, template+grammar, coherency.
std::optional<GenerationMode> parse_generation_mode(std::string_view text);

CandidateSentence render(const Template& tmpl, const PhraseVariant& head, const PhraseVariant& tail);
CandidateSentence render(const Template& tmpl, const WordSeq& head, const WordSeq& tail);

// "AtLocation" -> [at, location]; runs of capitals stay together
// ("ExternalURL" -> [external, url]).
WordSeq split_relation_name(std::string_view relation);

CandidateSentence generate_concatenation(const Triple& triple);

// mode must be kTemplate or kTemplateGrammar; uses the relation's first template.
CandidateSentence generate_deterministic(const Triple& triple, GenerationMode mode,
                                         const TemplateRegistry& registry, const Grammar& grammar);

// templates x head variants x tail variants, first occurrence kept per text.
std::vector<CandidateSentence> enumerate_candidates(const Triple& triple,
                                                    const TemplateRegistry& registry,
                                                    const Grammar& grammar);

}  // namespace tmine
