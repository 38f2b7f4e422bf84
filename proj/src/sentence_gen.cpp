#include "tmine/sentence_gen.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "tmine/errors.hpp"
#include "tmine/resources.hpp"

namespace tmine {

namespace {

constexpr std::string_view kHeadSlot = "{0}";
constexpr std::string_view kTailSlot = "{1}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

WordSeq tokenize_pattern(std::string_view pattern) {
  WordSeq words;
  std::istringstream in{std::string(pattern)};
  std::string w;
  while (in >> w) {
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.push_back(std::move(w));
  }
  return words;
}

}  // namespace

Template Template::parse(std::string relation, std::size_t ordinal, std::string pattern) {
  Template t;
  t.id_ = {std::move(relation), ordinal};
  t.pattern_ = std::move(pattern);
  t.words_ = tokenize_pattern(t.pattern_);

  auto where = [&](std::string_view slot) -> std::size_t {
    if (count_occurrences(t.pattern_, slot) != 1) {
      throw ConfigError("template " + t.id_.relation + "#" + std::to_string(ordinal) +
                        " must contain exactly one " + std::string(slot));
    }
    for (std::size_t i = 0; i < t.words_.size(); ++i) {
      if (t.words_[i] == slot) return i;
    }
    throw ConfigError("template " + t.id_.relation + "#" + std::to_string(ordinal) + ": slot " +
                      std::string(slot) + " is not a standalone word");
  };
  t.head_slot_ = where(kHeadSlot);
  t.tail_slot_ = where(kTailSlot);
  return t;
}

// ---- registry ----

TemplateRegistry TemplateRegistry::from_json(std::string_view json_text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("template registry: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("template registry must be a JSON object");

  TemplateRegistry registry;
  for (const auto& [relation, patterns] : doc.items()) {
    if (!patterns.is_array() || patterns.empty()) {
      throw ConfigError("template registry: relation " + relation + " needs a non-empty list");
    }
    std::vector<Template> list;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      if (!patterns[i].is_string()) {
        throw ConfigError("template registry: " + relation + " entries must be strings");
      }
      list.push_back(Template::parse(relation, i, patterns[i].get<std::string>()));
    }
    if (!registry.templates_.emplace(relation, std::move(list)).second) {
      throw ConfigError("template registry: duplicate relation " + relation);
    }
    registry.order_.push_back(relation);
  }
  return registry;
}

TemplateRegistry TemplateRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template registry " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

const TemplateRegistry& TemplateRegistry::bundled() {
  static const TemplateRegistry registry = from_json(resources::templates_json());
  return registry;
}

bool TemplateRegistry::contains(std::string_view relation) const {
  return templates_.find(relation) != templates_.end();
}

const std::vector<Template>& TemplateRegistry::templates_for(std::string_view relation) const {
  auto it = templates_.find(relation);
  if (it == templates_.end()) throw UnknownRelationError(0, std::string(relation));
  return it->second;
}

RelationSet TemplateRegistry::relation_set() const {
  return RelationSet(order_.begin(), order_.end());
}

// ---- modes ----

std::string_view to_string(GenerationMode mode) {
  switch (mode) {
    case GenerationMode::kConcat: return "concat";
    case GenerationMode::kTemplate: return "template";
    case GenerationMode::kTemplateGrammar: return "template+grammar";
    case GenerationMode::kCoherency: return "coherency";
  }
  return "concat";
}

std::optional<GenerationMode> parse_generation_mode(std::string_view text) {
  for (auto mode : {GenerationMode::kConcat, GenerationMode::kTemplate,
                    GenerationMode::kTemplateGrammar, GenerationMode::kCoherency}) {
    if (to_string(mode) == text) return mode;
  }
  return std::nullopt;
}

// ---- rendering ----

CandidateSentence render(const Template& tmpl, const PhraseVariant& head, const PhraseVariant& tail) {
  CandidateSentence out;
  out.template_id = tmpl.id();
  out.head_variant = head;
  out.tail_variant = tail;
  const auto& words = tmpl.words();
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i == tmpl.head_slot()) {
      out.head_slot = {out.text.size(), head.words.size()};
      out.text.insert(out.text.end(), head.words.begin(), head.words.end());
    } else if (i == tmpl.tail_slot()) {
      out.tail_slot = {out.text.size(), tail.words.size()};
      out.text.insert(out.text.end(), tail.words.begin(), tail.words.end());
    } else {
      out.text.push_back(words[i]);
    }
  }
  return out;
}

CandidateSentence render(const Template& tmpl, const WordSeq& head, const WordSeq& tail) {
  return render(tmpl, PhraseVariant::identity(head), PhraseVariant::identity(tail));
}

WordSeq split_relation_name(std::string_view relation) {
  WordSeq words;
  std::string current;
  auto upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
  auto lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < relation.size(); ++i) {
    char c = relation[i];
    if (c == '_' || c == ' ' || c == '-') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
      continue;
    }
    bool boundary = false;
    if (i > 0 && upper(c)) {
      char prev = relation[i - 1];
      bool next_lower = i + 1 < relation.size() && lower(relation[i + 1]);
      // aB starts a word; in ABc the B starts a word.
      boundary = !upper(prev) || next_lower;
    }
    if (boundary && !current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
    current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

CandidateSentence generate_concatenation(const Triple& triple) {
  CandidateSentence out;
  out.head_variant = PhraseVariant::identity(triple.head);
  out.tail_variant = PhraseVariant::identity(triple.tail);
  out.text = triple.head;
  out.head_slot = {0, triple.head.size()};
  auto rel = split_relation_name(triple.relation);
  out.text.insert(out.text.end(), rel.begin(), rel.end());
  out.tail_slot = {out.text.size(), triple.tail.size()};
  out.text.insert(out.text.end(), triple.tail.begin(), triple.tail.end());
  return out;
}

CandidateSentence generate_deterministic(const Triple& triple, GenerationMode mode,
                                         const TemplateRegistry& registry, const Grammar& grammar) {
  const auto& first = registry.templates_for(triple.relation).front();
  switch (mode) {
    case GenerationMode::kTemplate:
      return render(first, triple.head, triple.tail);
    case GenerationMode::kTemplateGrammar:
      return render(first, deterministic_variant(triple.head, grammar),
                    deterministic_variant(triple.tail, grammar));
    default:
      throw std::invalid_argument("generate_deterministic: mode must be template or template+grammar");
  }
}

std::vector<CandidateSentence> enumerate_candidates(const Triple& triple,
                                                    const TemplateRegistry& registry,
                                                    const Grammar& grammar) {
  const auto& templates = registry.templates_for(triple.relation);
  auto heads = enumerate_variants(triple.head, grammar);
  auto tails = enumerate_variants(triple.tail, grammar);

  std::vector<CandidateSentence> out;
  std::set<WordSeq> seen;
  for (const auto& tmpl : templates) {
    for (const auto& h : heads) {
      for (const auto& t : tails) {
        auto candidate = render(tmpl, h, t);
        if (seen.insert(candidate.text).second) out.push_back(std::move(candidate));
      }
    }
  }
  return out;
}

}  // namespace tmine
