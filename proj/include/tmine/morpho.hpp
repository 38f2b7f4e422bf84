#pragma once

#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tmine/core.hpp"

namespace tmine {

enum class PosTag { kNoun, kAdjective, kVerbInfinitive, kVerbOther, kNumber, kOther };

std::string_view to_string(PosTag tag);
// Accepts the lexicon spellings: noun adj verb verb_other num other.
std::optional<PosTag> parse_pos_tag(std::string_view text);

enum class Article { kA, kAn, kThe };

std::string_view to_string(Article article);

// The three grammatical rewrites applied to a head or tail phrase.
struct PrependArticle {
  Article article = Article::kA;
  auto operator<=>(const PrependArticle&) const = default;
};
struct Gerundize {
  auto operator<=>(const Gerundize&) const = default;
};
struct PluralizeAfterNumber {
  auto operator<=>(const PluralizeAfterNumber&) const = default;
};

using Transform = std::variant<PrependArticle, Gerundize, PluralizeAfterNumber>;

std::string describe(const Transform& transform);

// A phrase after zero or more transforms. article_index marks the inserted
// article, which is template context rather than entity content.
struct PhraseVariant {
  WordSeq words;
  std::vector<Transform> applied;
  std::optional<std::size_t> article_index;

  static PhraseVariant identity(WordSeq words) { return {std::move(words), {}, std::nullopt}; }
  // Indices into words that belong to the entity itself.
  std::vector<std::size_t> content_indices() const;
  bool operator==(const PhraseVariant&) const = default;
};

class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual PosTag tag(std::string_view word) const = 0;
};

// Most-frequent-tag lexicon with suffix heuristics for unknown words.
class LexiconTagger final : public Tagger {
 public:
  LexiconTagger() = default;
  explicit LexiconTagger(std::map<std::string, PosTag, std::less<>> entries)
      : entries_(std::move(entries)) {}

  // Reads "word<TAB>tag" lines; '#' starts a comment line.
  static LexiconTagger from_tsv(std::istream& in);
  static LexiconTagger from_tsv_text(std::string_view text);

  PosTag tag(std::string_view word) const override;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, PosTag, std::less<>> entries_;
};

// Rule-based English gerund and plural formation backed by exception lists.
class Inflector {
 public:
  Inflector() = default;
  Inflector(std::map<std::string, std::string, std::less<>> gerund_exceptions,
            std::map<std::string, std::string, std::less<>> plural_exceptions)
      : gerunds_(std::move(gerund_exceptions)), plurals_(std::move(plural_exceptions)) {}

  static Inflector from_tsv_text(std::string_view gerunds, std::string_view plurals);

  std::string gerund(std::string_view verb) const;
  std::string plural(std::string_view noun) const;

 private:
  std::map<std::string, std::string, std::less<>> gerunds_;
  std::map<std::string, std::string, std::less<>> plurals_;
};

// Tagger + inflector pair used by every transform.
struct Grammar {
  std::shared_ptr<const Tagger> tagger;
  std::shared_ptr<const Inflector> inflector;

  // Lexicon and exception lists compiled into the library.
  static const Grammar& bundled();
};

struct PrefixTags {
  PosTag first = PosTag::kOther;
  std::optional<PosTag> second;
  bool operator==(const PrefixTags&) const = default;
};

PrefixTags tag_prefix(const WordSeq& phrase, const Tagger& tagger);

// "an" before a vowel-initial word, "a" otherwise.
Article indefinite_article_for(std::string_view next_word);

bool is_applicable(const WordSeq& phrase, const Transform& transform, const Tagger& tagger);

// Where an article would go: before a noun/adjective-initial phrase, or
// between a leading verb and the noun/adjective that follows it.
std::optional<std::size_t> article_slot(const WordSeq& phrase, const Tagger& tagger);

// Throws NotApplicableError when the rule's condition does not hold.
WordSeq apply_transform(const WordSeq& phrase, const Transform& transform, const Grammar& grammar);

// Applies a set of transforms whose conditions are all judged on the
// original phrase. Order of the span does not matter.
PhraseVariant apply_transforms(const WordSeq& phrase, std::span<const Transform> transforms,
                               const Grammar& grammar);

// Identity first, then each applicable single transform (one per article).
// Deduplicated by surface form.
std::vector<PhraseVariant> enumerate_variants(const WordSeq& phrase, const Grammar& grammar);

// Every applicable transform at once, article chosen by indefinite_article_for.
PhraseVariant deterministic_variant(const WordSeq& phrase, const Grammar& grammar);

}  // namespace tmine
