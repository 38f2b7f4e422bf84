#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tmine {

using WordSeq = std::vector<std::string>;

// A (head, relation, tail) assertion. Head and tail are normalized word
// sequences; relation is a registry key such as "AtLocation".
struct Triple {
  WordSeq head;
  std::string relation;
  WordSeq tail;
  std::optional<std::string> source_id;

  // Content equality; source_id is provenance and does not take part.
  bool same_content(const Triple& other) const {
    return head == other.head && relation == other.relation && tail == other.tail;
  }
  bool operator==(const Triple& other) const = default;
};

struct LabeledTriple {
  Triple triple;
  bool label = false;
  bool operator==(const LabeledTriple& other) const = default;
};

// Higher means more plausible.
using ValidityScore = double;

enum class RecordFormat {
  kCkbcTsv,       // relation<TAB>head<TAB>tail<TAB>label
  kCandidateTsv,  // relation<TAB>head<TAB>tail
};

using RelationSet = std::set<std::string, std::less<>>;

// Lowercases, maps '_' to ' ', collapses whitespace and splits into words.
// Throws EmptyPhraseError when nothing is left.
WordSeq normalize_surface(std::string_view phrase);

std::string join_words(const WordSeq& words, std::string_view sep = " ");

// Parses one record. ckbc-tsv yields a LabeledTriple, candidate-tsv a Triple.
// line_no is only used for error messages.
std::variant<Triple, LabeledTriple> parse_triple_line(std::string_view line, RecordFormat format,
                                                      const RelationSet& relations,
                                                      std::size_t line_no = 0);

LabeledTriple parse_labeled_line(std::string_view line, const RelationSet& relations,
                                 std::size_t line_no = 0);
Triple parse_candidate_line(std::string_view line, const RelationSet& relations,
                            std::size_t line_no = 0);

std::string serialize_triple_line(const Triple& triple);
std::string serialize_triple_line(const LabeledTriple& labeled);

// Whole-file readers. Blank lines and lines starting with '#' are ignored.
// With skip_bad, record errors are appended to *warnings instead of thrown.
std::vector<LabeledTriple> read_labeled_triples(std::istream& in, const RelationSet& relations,
                                                bool skip_bad = false,
                                                std::vector<std::string>* warnings = nullptr);
std::vector<Triple> read_candidate_triples(std::istream& in, const RelationSet& relations,
                                           bool skip_bad = false,
                                           std::vector<std::string>* warnings = nullptr);

}  // namespace tmine
