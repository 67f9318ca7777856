#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "case_study.hpp"
#include "ergkit/analysis.hpp"
#include "ergkit/pipeline.hpp"

using namespace ergkit;
using namespace ergkit::testing;
namespace fs = std::filesystem;

namespace {

std::vector<DatasetRecord> sample_records() {
  MockGateway mock;
  SynthOptions o;
  o.levels = {1, 3, 5};
  o.count = 4;
  o.seed = 11;
  o.workers = 1;
  o.multi_turn_ratio = 0.5;
  o.adversarial_ratio = 0.5;
  return synthesize(default_banks(), mock, mock, o);
}

}  // namespace

TEST_CASE("records round-trip") {
  const auto records = sample_records();
  REQUIRE(records.size() == 12);
  bool single = false, multi = false;
  for (const auto& r : records) {
    const auto line = serialize_record(r);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.find(kDatasetFormat) != std::string::npos);
    CHECK(parse_record(line) == r);
    single |= r.kind == RecordKind::single_turn;
    multi |= r.kind == RecordKind::multi_turn;
    CHECK(r.constraints().size() == static_cast<std::size_t>(r.level));
    CHECK(r.predicates().size() == r.constraints().size());
    CHECK(r.broken_constraint < r.constraints().size());
    CHECK(r.provenance.seed == 11);
    CHECK(r.provenance.generator_mode == "mock");
  }
  CHECK(single);
  CHECK(multi);
  CHECK(parse_dataset(serialize_dataset(records)) == records);
}

TEST_CASE("dataset text edge cases") {
  CHECK(parse_dataset("").empty());
  CHECK(parse_dataset("\n\n").empty());
  const auto records = sample_records();
  auto text = serialize_dataset(std::span(records).first(3));
  const auto third = text.rfind('\n', text.size() - 2);
  text = text.substr(0, third + 20);
  try {
    parse_dataset(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_record("{}"), ParseError);
  CHECK_THROWS_AS(parse_record("[1]", 9), ParseError);
  auto wrong = nlohmann::json::parse(serialize_record(records[0]));
  wrong["format"] = "other/1";
  CHECK_THROWS_AS(parse_record(wrong.dump()), ParseError);
}

TEST_CASE("dataset files") {
  const auto dir = fs::temp_directory_path() / ("ergkit_dataset_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto records = sample_records();
  write_dataset(records, dir / "d.jsonl");
  CHECK(read_dataset(dir / "d.jsonl") == records);
  CHECK(read_text_file(dir / "d.jsonl") == serialize_dataset(records));
  write_text_file(dir / "t.txt", "a\nb");
  CHECK(read_text_file(dir / "t.txt") == "a\nb");
  CHECK_THROWS_AS(read_text_file(dir / "absent"), NotFoundError);
  CHECK_THROWS_AS(read_dataset(dir / "absent"), NotFoundError);
  fs::remove_all(dir);
}

TEST_CASE("canonical and mutated responses") {
  for (const auto& r : sample_records()) {
    const auto preds = r.predicates();
    const auto vocab = keyword_vocabulary(preds);
    const auto m_ok = measure(r.canonical_response, vocab);
    const auto m_bad = measure(r.mutated_response, vocab);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      CHECK(verify(preds[i], m_ok));
      CHECK(verify(preds[i], m_bad) == (i != r.broken_constraint));
    }
  }
}
