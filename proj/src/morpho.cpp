#include "tmine/morpho.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tmine/errors.hpp"
#include "tmine/resources.hpp"

namespace tmine {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool is_consonant(char c) { return std::isalpha(static_cast<unsigned char>(c)) && !is_vowel(c); }

int vowel_groups(std::string_view word) {
  int groups = 0;
  bool in_group = false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    char c = word[i];
    bool vowel = is_vowel(c) || (c == 'y' && i > 0);
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }
  return groups;
}

bool is_numeral(std::string_view word) {
  bool digit = false;
  for (char c : word) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != ',' && c != '.') {
      return false;
    }
  }
  return digit;
}

PosTag guess_from_suffix(std::string_view w) {
  if (is_numeral(w)) return PosTag::kNumber;
  if (w.size() > 4 && ends_with(w, "ing")) return PosTag::kVerbOther;
  if (w.size() > 3 && ends_with(w, "ed")) return PosTag::kVerbOther;
  if (w.size() > 3 && ends_with(w, "ly")) return PosTag::kOther;
  for (std::string_view suffix : {"ous", "ful", "ive", "able", "ible", "less", "ish", "ical", "ic", "al"}) {
    if (w.size() > suffix.size() + 2 && ends_with(w, suffix)) return PosTag::kAdjective;
  }
  return PosTag::kNoun;
}

template <typename Fn>
void for_each_tsv_row(std::string_view text, Fn&& fn) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected key<TAB>value");
    fn(line.substr(0, tab), line.substr(tab + 1), line_no);
  }
}

std::map<std::string, std::string, std::less<>> read_pairs(std::string_view text) {
  std::map<std::string, std::string, std::less<>> out;
  for_each_tsv_row(text, [&](std::string key, std::string value, std::size_t) {
    out.emplace(std::move(key), std::move(value));
  });
  return out;
}

bool is_nominal(PosTag tag) { return tag == PosTag::kNoun || tag == PosTag::kAdjective; }

bool is_verb(PosTag tag) { return tag == PosTag::kVerbInfinitive || tag == PosTag::kVerbOther; }

}  // namespace

std::string_view to_string(PosTag tag) {
  switch (tag) {
    case PosTag::kNoun: return "noun";
    case PosTag::kAdjective: return "adj";
    case PosTag::kVerbInfinitive: return "verb";
    case PosTag::kVerbOther: return "verb_other";
    case PosTag::kNumber: return "num";
    case PosTag::kOther: return "other";
  }
  return "other";
}

std::optional<PosTag> parse_pos_tag(std::string_view text) {
  for (auto tag : {PosTag::kNoun, PosTag::kAdjective, PosTag::kVerbInfinitive, PosTag::kVerbOther,
                   PosTag::kNumber, PosTag::kOther}) {
    if (to_string(tag) == text) return tag;
  }
  return std::nullopt;
}

std::string_view to_string(Article article) {
  switch (article) {
    case Article::kA: return "a";
    case Article::kAn: return "an";
    case Article::kThe: return "the";
  }
  return "a";
}

std::string describe(const Transform& transform) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, PrependArticle>) {
          return "article:" + std::string(to_string(t.article));
        } else if constexpr (std::is_same_v<T, Gerundize>) {
          return "gerund";
        } else {
          return "plural";
        }
      },
      transform);
}

std::vector<std::size_t> PhraseVariant::content_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (article_index && *article_index == i) continue;
    out.push_back(i);
  }
  return out;
}

// ---- LexiconTagger ----

LexiconTagger LexiconTagger::from_tsv(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_tsv_text(buffer.str());
}

LexiconTagger LexiconTagger::from_tsv_text(std::string_view text) {
  std::map<std::string, PosTag, std::less<>> entries;
  for_each_tsv_row(text, [&](std::string word, std::string tag, std::size_t line_no) {
    auto parsed = parse_pos_tag(tag);
    if (!parsed) throw ParseError(line_no, "unknown POS tag '" + tag + "'");
    entries.emplace(std::move(word), *parsed);
  });
  return LexiconTagger(std::move(entries));
}

PosTag LexiconTagger::tag(std::string_view word) const {
  if (auto it = entries_.find(word); it != entries_.end()) return it->second;
  return guess_from_suffix(word);
}

// ---- Inflector ----

Inflector Inflector::from_tsv_text(std::string_view gerunds, std::string_view plurals) {
  return Inflector(read_pairs(gerunds), read_pairs(plurals));
}

std::string Inflector::gerund(std::string_view verb) const {
  if (auto it = gerunds_.find(verb); it != gerunds_.end()) return it->second;
  std::string w(verb);
  if (w.empty()) return w;
  if (ends_with(w, "ing") && w.size() > 4) return w;
  if (ends_with(w, "ie")) return w.substr(0, w.size() - 2) + "ying";
  if (w.size() > 2 && w.back() == 'e' && !ends_with(w, "ee") && !ends_with(w, "ye") &&
      !ends_with(w, "oe")) {
    return w.substr(0, w.size() - 1) + "ing";
  }
  // Consonant-vowel-consonant monosyllables double the final consonant.
  if (w.size() >= 3 && vowel_groups(w) == 1) {
    char c1 = w[w.size() - 3], v = w[w.size() - 2], c2 = w.back();
    if (is_consonant(c1) && is_vowel(v) && is_consonant(c2) && c2 != 'w' && c2 != 'x' && c2 != 'y') {
      return w + c2 + "ing";
    }
  }
  return w + "ing";
}

std::string Inflector::plural(std::string_view noun) const {
  if (auto it = plurals_.find(noun); it != plurals_.end()) return it->second;
  std::string w(noun);
  if (w.empty()) return w;
  // Treat words already ending in a plural -s as plural.
  if (w.size() > 2 && w.back() == 's' && !ends_with(w, "ss") && !ends_with(w, "us") &&
      !ends_with(w, "is") && !ends_with(w, "as") && !ends_with(w, "os")) {
    return w;
  }
  if (ends_with(w, "s") || ends_with(w, "x") || ends_with(w, "z") || ends_with(w, "ch") ||
      ends_with(w, "sh")) {
    return w + "es";
  }
  if (w.size() > 1 && w.back() == 'y' && is_consonant(w[w.size() - 2])) {
    return w.substr(0, w.size() - 1) + "ies";
  }
  return w + "s";
}

const Grammar& Grammar::bundled() {
  static const Grammar grammar{
      std::make_shared<const LexiconTagger>(LexiconTagger::from_tsv_text(resources::lexicon_tsv())),
      std::make_shared<const Inflector>(Inflector::from_tsv_text(
          resources::gerund_exceptions_tsv(), resources::plural_exceptions_tsv()))};
  return grammar;
}

// ---- transforms ----

PrefixTags tag_prefix(const WordSeq& phrase, const Tagger& tagger) {
  if (phrase.empty()) throw std::invalid_argument("tag_prefix: empty phrase");
  PrefixTags tags{tagger.tag(phrase[0]), std::nullopt};
  if (phrase.size() > 1) tags.second = tagger.tag(phrase[1]);
  return tags;
}

Article indefinite_article_for(std::string_view next_word) {
  return !next_word.empty() && is_vowel(next_word.front()) ? Article::kAn : Article::kA;
}

std::optional<std::size_t> article_slot(const WordSeq& phrase, const Tagger& tagger) {
  if (phrase.empty()) return std::nullopt;
  auto tags = tag_prefix(phrase, tagger);
  if (is_nominal(tags.first)) return 0;
  if (is_verb(tags.first) && tags.second && is_nominal(*tags.second)) return 1;
  return std::nullopt;
}

bool is_applicable(const WordSeq& phrase, const Transform& transform, const Tagger& tagger) {
  if (phrase.empty()) return false;
  return std::visit(
      [&](const auto& t) -> bool {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, PrependArticle>) {
          return article_slot(phrase, tagger).has_value();
        } else if constexpr (std::is_same_v<T, Gerundize>) {
          return tagger.tag(phrase[0]) == PosTag::kVerbInfinitive;
        } else {
          return phrase.size() >= 2 && tagger.tag(phrase[0]) == PosTag::kNumber;
        }
      },
      transform);
}

WordSeq apply_transform(const WordSeq& phrase, const Transform& transform, const Grammar& grammar) {
  Transform one[] = {transform};
  return apply_transforms(phrase, one, grammar).words;
}

PhraseVariant apply_transforms(const WordSeq& phrase, std::span<const Transform> transforms,
                               const Grammar& grammar) {
  if (phrase.empty()) throw std::invalid_argument("apply_transforms: empty phrase");
  std::vector<Transform> applied(transforms.begin(), transforms.end());
  std::sort(applied.begin(), applied.end());
  for (std::size_t i = 1; i < applied.size(); ++i) {
    if (applied[i].index() == applied[i - 1].index()) {
      throw std::invalid_argument("apply_transforms: transform kind repeated");
    }
  }
  for (const auto& t : applied) {
    if (!is_applicable(phrase, t, *grammar.tagger)) {
      throw NotApplicableError("transform " + describe(t) + " does not apply to '" +
                               join_words(phrase) + "'");
    }
  }

  PhraseVariant variant{phrase, applied, std::nullopt};
  std::optional<Article> article;
  for (const auto& t : applied) {
    if (auto* p = std::get_if<PrependArticle>(&t)) article = p->article;
    if (std::holds_alternative<Gerundize>(t)) {
      variant.words[0] = grammar.inflector->gerund(variant.words[0]);
    }
    if (std::holds_alternative<PluralizeAfterNumber>(t)) {
      variant.words[1] = grammar.inflector->plural(variant.words[1]);
    }
  }
  if (article) {
    auto slot = *article_slot(phrase, *grammar.tagger);
    variant.words.insert(variant.words.begin() + static_cast<std::ptrdiff_t>(slot),
                         std::string(to_string(*article)));
    variant.article_index = slot;
  }
  return variant;
}

std::vector<PhraseVariant> enumerate_variants(const WordSeq& phrase, const Grammar& grammar) {
  if (phrase.empty()) throw std::invalid_argument("enumerate_variants: empty phrase");
  std::vector<Transform> singles;
  for (auto article : {Article::kA, Article::kAn, Article::kThe}) {
    singles.emplace_back(PrependArticle{article});
  }
  singles.emplace_back(Gerundize{});
  singles.emplace_back(PluralizeAfterNumber{});

  std::vector<PhraseVariant> out{PhraseVariant::identity(phrase)};
  std::set<WordSeq> seen{phrase};
  for (const auto& t : singles) {
    if (!is_applicable(phrase, t, *grammar.tagger)) continue;
    Transform one[] = {t};
    auto variant = apply_transforms(phrase, one, grammar);
    if (seen.insert(variant.words).second) out.push_back(std::move(variant));
  }
  return out;
}

PhraseVariant deterministic_variant(const WordSeq& phrase, const Grammar& grammar) {
  if (phrase.empty()) throw std::invalid_argument("deterministic_variant: empty phrase");
  const Tagger& tagger = *grammar.tagger;
  std::vector<Transform> transforms;
  if (is_applicable(phrase, Gerundize{}, tagger)) transforms.emplace_back(Gerundize{});
  if (is_applicable(phrase, PluralizeAfterNumber{}, tagger)) {
    transforms.emplace_back(PluralizeAfterNumber{});
  }
  if (auto slot = article_slot(phrase, tagger)) {
    // The article agrees with whatever word ends up after it.
    auto inflected = apply_transforms(phrase, transforms, grammar).words;
    transforms.emplace_back(PrependArticle{indefinite_article_for(inflected[*slot])});
  }
  return apply_transforms(phrase, transforms, grammar);
}

}  // namespace tmine
