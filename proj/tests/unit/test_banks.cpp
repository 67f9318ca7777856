#include <doctest.h>

#include "ergkit/banks.hpp"
#include "ergkit/error.hpp"

using namespace ergkit;

namespace {

std::string header() { return R"({"format": "ergkit-banks", "version": 1, "bank_version": "t1"})"; }

std::string fact(const std::string& id, const std::string& answer) {
  return R"({"kind": "fact", "id": ")" + id + R"(", "payload": {"question": "q )" + id + R"(", "answer": )" + answer +
         "}}";
}

}  // namespace

TEST_CASE("closed catalogues have fixed sizes") {
  CHECK(condition_catalogue().size() == 14);
  CHECK(operation_catalogue().size() == 4);
  CHECK(dimension_catalogue().size() == 21);
  for (const auto& c : condition_catalogue()) CHECK(condition_from_string(c.name) == c.id);
  for (const auto& d : dimension_catalogue()) CHECK(dimension_from_string(d.name) == d.id);
  CHECK_FALSE(condition_from_string("between").has_value());
}

TEST_CASE("default bank carries the case-study facts") {
  const auto& b = default_banks();
  CHECK(b.facts().size() >= 40);
  CHECK(lookup_fact(b, "galilean_moons").answer == FactAnswer{std::int64_t{4}});
  CHECK(lookup_fact(b, "octopus_brains").answer == FactAnswer{std::int64_t{9}});
  CHECK(lookup_fact(b, "cyrillic_letters").answer == FactAnswer{std::int64_t{33}});
  CHECK(lookup_fact(b, "chess_pawns_per_side").answer == FactAnswer{std::int64_t{8}});
  CHECK(lookup_fact(b, "square_symmetry_axes").answer == FactAnswer{std::int64_t{4}});
  CHECK_THROWS_AS(lookup_fact(b, "no_such_fact"), NotFoundError);
  CHECK(b.conditions().size() == 14);
}

TEST_CASE("bank parsing") {
  SUBCASE("text and integer answers") {
    auto b = parse_banks(header() + "\n# comment\n\n" + fact("a", "3") + "\n" + fact("b", "\"Paris\"") + "\n");
    CHECK(b.version() == "t1");
    REQUIRE(b.facts().size() == 2);
    CHECK(b.facts()[0].is_numeric());
    CHECK(b.facts()[1].answer_text() == "Paris");
  }
  SUBCASE("duplicate ids") {
    CHECK_THROWS_AS(parse_banks(header() + "\n" + fact("a", "3") + "\n" + fact("a", "4")), IntegrityError);
  }
  SUBCASE("malformed record names its line") {
    try {
      parse_banks(header() + "\n" + fact("a", "3") + "\n{\"kind\": \"fact\"", "bank.jsonl");
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("bank.jsonl:3") != std::string::npos);
    }
  }
  SUBCASE("missing header and empty files") {
    CHECK_THROWS_AS(parse_banks(fact("a", "3")), SchemaError);
    CHECK_THROWS_AS(parse_banks(""), SchemaError);
  }
  SUBCASE("empty text answer") { CHECK_THROWS_AS(parse_banks(header() + "\n" + fact("a", "\"\"")), SchemaError); }
  SUBCASE("restricted pools") {
    auto b = parse_banks(header() + "\n{\"kind\": \"operation\", \"id\": \"addition\"}\n");
    REQUIRE(b.operations().size() == 1);
    CHECK(b.operations()[0] == Operation::addition);
    CHECK_THROWS_AS(parse_banks(header() + "\n{\"kind\": \"operation\", \"id\": \"modulo\"}"), SchemaError);
  }
}

TEST_CASE("node sampling") {
  const auto& b = default_banks();
  NodeCounts counts{2, 1, 1, 0};
  const auto first = sample_nodes(b, counts, 7);
  CHECK(first == sample_nodes(b, counts, 7));
  CHECK(first.facts.size() == 2);
  CHECK(first.facts[0] != first.facts[1]);
  CHECK(first.dimensions.empty());
  CHECK(sample_nodes(b, {0, 0, 0, 0}, 1).facts.empty());
  CHECK_THROWS_AS(sample_nodes(b, {0, 15, 0, 0}, 1), CapacityError);
  CHECK_THROWS_AS(sample_nodes(b, {0, 0, 5, 0}, 1), CapacityError);

  bool differs = false;
  for (std::uint64_t s = 0; s < 10 && !differs; ++s) differs = sample_nodes(b, {3, 0, 0, 0}, s) != first;
  CHECK(differs);
}
