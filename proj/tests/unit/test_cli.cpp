#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "ergkit/cli.hpp"
#include "ergkit/dataset.hpp"
#include "ergkit/error.hpp"

using namespace ergkit;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args, const Settings& env = {}) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err, env);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("ergkit_cli_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::vector<json> lines_of(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"synth", "--levels"}).code == kExitUsage);
  CHECK(cli({"verify"}).code == kExitUsage);
  CHECK(cli({"verify", "-d", "x", "--use", "other"}).code == kExitUsage);
  const auto help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("synth") != std::string::npos);
}

TEST_CASE("runtime failures exit with 1") {
  Scratch s;
  auto r = cli({"synth", "--levels", "9"});
  CHECK(r.code == kExitFailure);
  CHECK(r.err.find("level") != std::string::npos);
  CHECK(cli({"verify", "-d", s.path("absent.jsonl")}).code == kExitFailure);
  CHECK(cli({"synth", "--gateway", "replay"}).code == kExitFailure);

  r = cli({"synth", "--gateway", "live", "--count", "1", "--levels", "1"});
  CHECK(r.code == kExitFailure);
  CHECK(r.err.find(std::string(kApiKeyVariable)) != std::string::npos);
}

TEST_CASE("synth, verify, score and report") {
  Scratch s;
  const std::vector<std::string> synth = {"synth", "--levels", "1..3", "--count", "3", "--seed", "5",
                                          "--workers", "2", "-o", s.path("d.jsonl")};
  REQUIRE(cli(synth).code == kExitOk);
  const auto first = read_text_file(s.path("d.jsonl"));
  REQUIRE(cli(synth).code == kExitOk);
  CHECK(read_text_file(s.path("d.jsonl")) == first);
  const auto records = read_dataset(s.path("d.jsonl"));
  REQUIRE(records.size() == 9);

  const auto to_stdout = cli({"synth", "--levels", "1..3", "--count", "3", "--seed", "5"});
  CHECK(to_stdout.out == first);

  auto v = cli({"verify", "-d", s.path("d.jsonl"), "-o", s.path("ok.jsonl")});
  REQUIRE(v.code == kExitOk);
  CHECK(v.err.find("9 checked, 0 failed") != std::string::npos);
  v = cli({"verify", "-d", s.path("d.jsonl"), "--use", "mutated", "-o", s.path("bad.jsonl")});
  REQUIRE(v.code == kExitOk);
  CHECK(v.err.find("9 checked, 9 failed") != std::string::npos);
  for (const auto& j : lines_of(read_text_file(s.path("bad.jsonl")))) CHECK(j["verdict"] == "FAIL");

  const auto ok = parse_report_lines(read_text_file(s.path("ok.jsonl")));
  REQUIRE(ok.size() == 9);
  for (const auto& l : ok) CHECK(parse_report_lines(serialize_report_line(l) + "\n").front() == l);

  std::string responses;
  responses += json{{"id", records[0].id}, {"response", records[0].mutated_response}}.dump() + "\n";
  write_text_file(s.path("r.jsonl"), responses);
  v = cli({"verify", "-d", s.path("d.jsonl"), "-r", s.path("r.jsonl")});
  CHECK(v.code == kExitOk);
  CHECK(v.err.find("1 checked, 1 failed, 8 without a response") != std::string::npos);

  const auto score = cli({"score", "--reports", s.path("ok.jsonl"), "--anchor", s.path("bad.jsonl")});
  REQUIRE(score.code == kExitOk);
  for (const auto& j : lines_of(score.out)) {
    CHECK(j["r_task"] == "1");
    CHECK(Rational::parse(j["r_ref"].get<std::string>()) > Rational(0));
    CHECK(j["r_total"] == (Rational(1) + Rational::parse(j["r_ref"].get<std::string>())).to_string());
  }

  const auto table = cli({"report", "--reports", s.path("bad.jsonl")});
  CHECK(table.code == kExitOk);
  CHECK(table.out.find("overall") != std::string::npos);
  CHECK(table.out.find("L5") != std::string::npos);
  const auto js = json::parse(cli({"report", "--reports", s.path("ok.jsonl"), "--json"}).out);
  CHECK(js["samples"] == 9);
  CHECK(js["csr"] == "1");
  CHECK(js["isr"] == "1");
  CHECK(js["levels"]["L2"]["samples"] == 3);

  const auto judged = cli({"judge", "-d", s.path("d.jsonl"), "--pattern", "structured"});
  REQUIRE(judged.code == kExitOk);
  const auto scores = lines_of(judged.out);
  CHECK(scores.size() == 9);
  for (const auto& j : scores) {
    const auto r = Rational::parse(j["r_think"].get<std::string>());
    CHECK(r >= Rational(0));
    CHECK(r <= Rational(1, 5));
  }
}

TEST_CASE("record then replay through the cli") {
  Scratch s;
  // record needs a live endpoint; without a key it fails before any request
  const auto rec = cli({"synth", "--gateway", "record", "--cassette", s.path("c.jsonl"), "--count", "1"});
  CHECK(rec.code == kExitFailure);
  CHECK(!fs::exists(s.path("c.jsonl")));
  CHECK(network_connection_count() == 0);
}
