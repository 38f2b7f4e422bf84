#include "tmine/core.hpp"

#include <cctype>
#include <istream>

#include "tmine/errors.hpp"

namespace tmine {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

WordSeq normalize_field(std::string_view field, std::size_t line_no, const char* name) {
  try {
    return normalize_surface(field);
  } catch (const EmptyPhraseError&) {
    throw ParseError(line_no, std::string("empty ") + name);
  }
}

}  // namespace

WordSeq normalize_surface(std::string_view phrase) {
  WordSeq words;
  std::string current;
  for (char raw : phrase) {
    auto c = static_cast<unsigned char>(raw);
    if (c == '_' || std::isspace(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  if (words.empty()) throw EmptyPhraseError();
  return words;
}

std::string join_words(const WordSeq& words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::variant<Triple, LabeledTriple> parse_triple_line(std::string_view line, RecordFormat format,
                                                      const RelationSet& relations,
                                                      std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  auto fields = split_tabs(line);
  const std::size_t needed = format == RecordFormat::kCkbcTsv ? 4 : 3;
  if (fields.size() < needed) {
    throw ParseError(line_no, "expected " + std::to_string(needed) + " tab-separated fields, got " +
                                  std::to_string(fields.size()));
  }

  std::string relation(trim(fields[0]));
  if (relation.empty()) throw ParseError(line_no, "empty relation");
  if (!relations.contains(relation)) throw UnknownRelationError(line_no, relation);

  Triple triple{normalize_field(fields[1], line_no, "head"), std::move(relation),
                normalize_field(fields[2], line_no, "tail"), std::nullopt};
  if (format == RecordFormat::kCandidateTsv) return triple;

  auto label = trim(fields[3]);
  if (label == "1") return LabeledTriple{std::move(triple), true};
  if (label == "0") return LabeledTriple{std::move(triple), false};
  throw ParseError(line_no, "label must be 0 or 1, got '" + std::string(label) + "'");
}

LabeledTriple parse_labeled_line(std::string_view line, const RelationSet& relations,
                                 std::size_t line_no) {
  return std::get<LabeledTriple>(parse_triple_line(line, RecordFormat::kCkbcTsv, relations, line_no));
}

Triple parse_candidate_line(std::string_view line, const RelationSet& relations,
                            std::size_t line_no) {
  return std::get<Triple>(parse_triple_line(line, RecordFormat::kCandidateTsv, relations, line_no));
}

std::string serialize_triple_line(const Triple& triple) {
  return triple.relation + '\t' + join_words(triple.head) + '\t' + join_words(triple.tail);
}

std::string serialize_triple_line(const LabeledTriple& labeled) {
  return serialize_triple_line(labeled.triple) + (labeled.label ? "\t1" : "\t0");
}

namespace {

template <typename T>
std::vector<T> read_records(std::istream& in, RecordFormat format, const RelationSet& relations,
                            bool skip_bad, std::vector<std::string>* warnings) {
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    try {
      auto record = parse_triple_line(line, format, relations, line_no);
      auto& value = std::get<T>(record);
      if constexpr (std::is_same_v<T, LabeledTriple>) {
        value.triple.source_id = "L" + std::to_string(line_no);
      } else {
        value.source_id = "L" + std::to_string(line_no);
      }
      out.push_back(std::move(value));
    } catch (const ParseError& e) {
      if (!skip_bad) throw;
      if (warnings) warnings->push_back(e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<LabeledTriple> read_labeled_triples(std::istream& in, const RelationSet& relations,
                                                bool skip_bad, std::vector<std::string>* warnings) {
  return read_records<LabeledTriple>(in, RecordFormat::kCkbcTsv, relations, skip_bad, warnings);
}

std::vector<Triple> read_candidate_triples(std::istream& in, const RelationSet& relations,
                                           bool skip_bad, std::vector<std::string>* warnings) {
  return read_records<Triple>(in, RecordFormat::kCandidateTsv, relations, skip_bad, warnings);
}

}  // namespace tmine
