#include <random>
#include <sstream>

#include "doctest.h"
#include "tmine/core.hpp"
#include "tmine/errors.hpp"
#include "tmine/sentence_gen.hpp"

using namespace tmine;

namespace {
const RelationSet& relations() {
  static const RelationSet rels = TemplateRegistry::bundled().relation_set();
  return rels;
}
}  // namespace

TEST_CASE("normalize_surface lowercases, collapses and maps underscores") {
  CHECK(normalize_surface("Pet  Store") == WordSeq{"pet", "store"});
  CHECK(normalize_surface("pet_store") == WordSeq{"pet", "store"});
  CHECK(normalize_surface("  Outer\tSpace ") == WordSeq{"outer", "space"});
  CHECK_THROWS_AS(normalize_surface("   "), EmptyPhraseError);
  CHECK_THROWS_AS(normalize_surface("__"), EmptyPhraseError);
}

TEST_CASE("normalize_surface is idempotent") {
  std::mt19937 rng(7);
  const std::string alphabet = "aBc_ Dx\t";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (int k = 0; k < 12; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    WordSeq once;
    try {
      once = normalize_surface(s);
    } catch (const EmptyPhraseError&) {
      continue;
    }
    CHECK(normalize_surface(join_words(once)) == once);
  }
}

TEST_CASE("parse ckbc-tsv line") {
  auto lt = parse_labeled_line("AtLocation\tferret\tpet store\t1", relations());
  CHECK(lt.triple.head == WordSeq{"ferret"});
  CHECK(lt.triple.relation == "AtLocation");
  CHECK(lt.triple.tail == WordSeq{"pet", "store"});
  CHECK(lt.label);
  CHECK_FALSE(parse_labeled_line("IsA\tdog\tanimal\t0", relations()).label);
}

TEST_CASE("parse candidate-tsv line") {
  auto t = parse_candidate_line("CapableOf\tmusician\tplay musical instrument", relations());
  CHECK(t.head == WordSeq{"musician"});
  CHECK(t.relation == "CapableOf");
  CHECK(t.tail == WordSeq{"play", "musical", "instrument"});
  auto v = parse_triple_line("CapableOf\tmusician\tplay", RecordFormat::kCandidateTsv, relations());
  CHECK(std::holds_alternative<Triple>(v));
}

TEST_CASE("parse errors") {
  SUBCASE("unknown relation names the relation") {
    try {
      parse_labeled_line("BogusRel\ta\tb\t1", relations(), 12);
      FAIL("expected throw");
    } catch (const UnknownRelationError& e) {
      CHECK(e.relation() == "BogusRel");
      CHECK(e.line_no() == 12);
    }
  }
  SUBCASE("too few fields carries the line number") {
    try {
      parse_labeled_line("IsA\tdog\tanimal", relations(), 3);
      FAIL("expected throw");
    } catch (const UnknownRelationError&) {
      FAIL("wrong error");
    } catch (const ParseError& e) {
      CHECK(e.line_no() == 3);
    }
  }
  SUBCASE("bad label") { CHECK_THROWS_AS(parse_labeled_line("IsA\tdog\tanimal\tyes", relations()), ParseError); }
  SUBCASE("empty head") { CHECK_THROWS_AS(parse_candidate_line("IsA\t  \tanimal", relations()), ParseError); }
}

TEST_CASE("parse then serialize round-trips field content") {
  std::mt19937 rng(11);
  const std::vector<std::string> words = {"pet", "store", "Dog", "big_red", "x"};
  const auto& rels = TemplateRegistry::bundled().relations();
  for (int i = 0; i < 200; ++i) {
    auto phrase = [&] {
      std::string s;
      int n = 1 + static_cast<int>(rng() % 3);
      for (int k = 0; k < n; ++k) s += (k ? " " : "") + words[rng() % words.size()];
      return s;
    };
    std::string line = rels[rng() % rels.size()] + "\t" + phrase() + "\t" + phrase() + "\t" +
                       (rng() % 2 ? "1" : "0");
    auto parsed = parse_labeled_line(line, relations());
    auto again = parse_labeled_line(serialize_triple_line(parsed), relations());
    CHECK(again == parsed);
  }
}

TEST_CASE("file readers skip comments and optionally bad records") {
  std::string text = "# header\nIsA\tdog\tanimal\t1\n\nBogus\ta\tb\t1\nIsA\tcat\tanimal\t0\n";
  {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_labeled_triples(in, relations()), UnknownRelationError);
  }
  std::istringstream in(text);
  std::vector<std::string> warnings;
  auto rows = read_labeled_triples(in, relations(), true, &warnings);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].triple.source_id == "L2");
  CHECK(warnings.size() == 1);
  CHECK(warnings[0].find("line 4") != std::string::npos);
}
