#include "ergkit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ergkit/dataset.hpp"
#include "ergkit/error.hpp"
#include "ergkit/judge.hpp"
#include "ergkit/pipeline.hpp"
#include "ergkit/scoring.hpp"

namespace ergkit {

using json = nlohmann::json;

namespace {

// --- line-delimited inputs -------------------------------------------------

template <class F>
void for_each_line(std::string_view text, F f) {
  std::size_t line = 0;
  while (!text.empty()) {
    ++line;
    const auto nl = text.find('\n');
    auto row = text.substr(0, nl);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.find_first_not_of(" \t") != std::string_view::npos) {
      json j = json::parse(row.begin(), row.end(), nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw ParseError("not a JSON object", line);
      }
      try {
        f(j, line);
      } catch (const json::exception& e) {
        throw ParseError(e.what(), line);
      }
    }
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

/// id -> text for files of {"id": ..., "<field>": ...} lines.
std::map<std::string, std::string> read_keyed_text(const std::string& path, const char* field) {
  std::map<std::string, std::string> out;
  for_each_line(read_text_file(path), [&](const json& j, std::size_t line) {
    if (!j.contains("id") || !j["id"].is_string() || !j.contains(field) || !j[field].is_string()) {
      throw ParseError(std::string("expected string fields 'id' and '") + field + "'", line);
    }
    out[j["id"].get<std::string>()] = j[field].get<std::string>();
  });
  return out;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

// --- gateways ----------------------------------------------------------------

struct Gateways {
  std::shared_ptr<Gateway> generator;
  std::shared_ptr<Gateway> judge;
  std::shared_ptr<Cassette> cassette;  // set in record mode, saved at the end
  std::string cassette_path;

  void finish() const {
    if (cassette) cassette->save(cassette_path);
  }
};

std::shared_ptr<Gateway> live(const Config& c, const std::string& model) {
  if (!c.api_key) throw CredentialError(std::string(kApiKeyVariable) + " is not set");
  LiveOptions o;
  o.base_url = c.base_url;
  o.model = model;
  o.api_key = *c.api_key;
  o.max_retries = static_cast<int>(c.max_retries);
  o.requests_per_second = c.requests_per_second;
  return std::make_shared<LiveGateway>(o);
}

Gateways make_gateways(const Config& c) {
  Gateways g;
  if (c.gateway == "mock") {
    g.generator = g.judge = std::make_shared<MockGateway>();
  } else if (c.gateway == "live") {
    g.generator = live(c, c.model);
    g.judge = live(c, c.judge_model);
  } else if (c.gateway == "replay") {
    if (c.cassette.empty()) throw ConfigError("replay needs a cassette path");
    auto cassette = Cassette::load(c.cassette);
    g.generator = std::make_shared<ReplayGateway>(cassette, c.model);
    g.judge = std::make_shared<ReplayGateway>(cassette, c.judge_model);
  } else {
    if (c.cassette.empty()) throw ConfigError("record needs a cassette path");
    g.cassette = std::filesystem::exists(c.cassette) ? Cassette::load(c.cassette) : std::make_shared<Cassette>();
    g.cassette_path = c.cassette;
    g.generator = std::make_shared<RecordingGateway>(live(c, c.model), g.cassette);
    g.judge = std::make_shared<RecordingGateway>(live(c, c.judge_model), g.cassette);
  }
  return g;
}

Banks load_bank(const Config& c) { return c.banks.empty() ? default_banks() : load_banks(c.banks); }

// --- command options ---------------------------------------------------------

struct Flags {
  std::string config_path;
  std::map<std::string, std::string> values;
};

void add_setting(CLI::App* cmd, Flags& flags, const std::string& key, const std::string& help) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  cmd->add_option_function<std::string>(
      flag, [&flags, key](const std::string& v) { flags.values[key] = v; }, help);
}

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  for (const char* key : {"gateway", "model", "judge_model", "base_url", "cassette", "banks", "requests_per_second",
                          "max_retries"}) {
    for (const auto& [name, help] : config_keys()) {
      if (name == key) add_setting(cmd, flags, name, help);
    }
  }
}

Config resolve(const Flags& flags, const Settings& env) {
  std::optional<std::filesystem::path> file;
  if (!flags.config_path.empty()) file = flags.config_path;
  return load_config(file, env, flags.values);
}

std::string fixed(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(6) << v;
  return ss.str();
}

// --- commands ----------------------------------------------------------------

int cmd_synth(const Config& c, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto banks = load_bank(c);
  auto g = make_gateways(c);
  const auto records = synthesize(banks, *g.generator, *g.judge, synth_options(c));
  g.finish();
  emit(out_path, serialize_dataset(records), out);
  err << "synth: " << records.size() << " records\n";
  return kExitOk;
}

int cmd_verify(const Config& c, const std::string& dataset, const std::string& responses, const std::string& use,
               bool skip_rubrics, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto records = read_dataset(dataset);
  std::map<std::string, std::string> given;
  if (!responses.empty()) given = read_keyed_text(responses, "response");
  Gateways g;
  bool need_judge = false;
  for (const auto& r : records) need_judge = need_judge || !r.rubrics().empty();
  if (need_judge && !skip_rubrics) g = make_gateways(c);

  std::string text;
  std::size_t failed = 0, missing = 0;
  for (const auto& r : records) {
    std::string response;
    if (!responses.empty()) {
      auto it = given.find(r.id);
      if (it == given.end()) {
        ++missing;
        continue;
      }
      response = it->second;
    } else {
      response = use == "mutated" ? r.mutated_response : r.canonical_response;
    }
    std::vector<bool> rubric_verdicts;
    const auto rubrics = r.rubrics();
    if (!rubrics.empty() && !skip_rubrics) rubric_verdicts = judge_rubrics(rubrics, response, *g.judge);
    const auto predicates = r.predicates();
    ReportLine line{r.id, verify_instruction(predicates, response, rubric_verdicts, r.level)};
    if (line.report.satisfied_count != line.report.total_constraints ||
        std::count(rubric_verdicts.begin(), rubric_verdicts.end(), false) > 0) {
      ++failed;
    }
    text += serialize_report_line(line) + "\n";
  }
  g.finish();
  emit(out_path, text, out);
  err << "verify: " << records.size() - missing << " checked, " << failed << " failed";
  if (missing) err << ", " << missing << " without a response";
  err << "\n";
  return kExitOk;
}

int cmd_score(const Config& c, const std::string& reports_path, const std::string& anchor_path,
              const std::string& thinking_scores, const std::string& out_path, std::ostream& out) {
  const auto reports = parse_report_lines(read_text_file(reports_path));
  std::map<std::string, VerificationReport> anchors;
  if (!anchor_path.empty()) {
    for (auto& l : parse_report_lines(read_text_file(anchor_path))) anchors[l.id] = l.report;
  }
  std::map<std::string, std::pair<Rational, Rational>> thinking;
  if (!thinking_scores.empty()) {
    for_each_line(read_text_file(thinking_scores), [&](const json& j, std::size_t line) {
      if (!j.contains("id") || !j.contains("s_logic") || !j.contains("s_corr")) {
        throw ParseError("expected id, s_logic and s_corr", line);
      }
      thinking[j["id"].get<std::string>()] = {Rational::parse(j["s_logic"].get<std::string>()),
                                              Rational::parse(j["s_corr"].get<std::string>())};
    });
  }
  std::string text;
  for (const auto& l : reports) {
    std::optional<VerificationReport> anchor;
    if (auto it = anchors.find(l.id); it != anchors.end()) anchor = it->second;
    Rational r_think;
    if (auto it = thinking.find(l.id); it != thinking.end()) {
      r_think = thinking_reward(it->second.first, it->second.second, c.think);
    }
    const auto b = score_response(l.report, anchor, r_think);
    json j = {{"id", l.id},
              {"level", l.report.level},
              {"r_constr", b.r_constr.to_string()},
              {"r_rubric", b.r_rubric.to_string()},
              {"r_task", b.r_task.to_string()},
              {"r_think", b.r_think.to_string()},
              {"r_ref", b.r_ref.to_string()},
              {"r_total", b.r_total.to_string()},
              {"anchor_r_task", b.anchor_r_task ? json(b.anchor_r_task->to_string()) : json(nullptr)}};
    text += j.dump() + "\n";
  }
  emit(out_path, text, out);
  return kExitOk;
}

int cmd_report(const std::string& reports_path, bool as_json, std::ostream& out) {
  const auto lines = parse_report_lines(read_text_file(reports_path));
  std::vector<VerificationReport> reports;
  for (const auto& l : lines) reports.push_back(l.report);
  const auto m = csr_isr(reports);
  if (as_json) {
    json levels = json::object();
    for (const auto& [level, lm] : m.per_level) {
      levels["L" + std::to_string(level)] = {{"samples", lm.samples},
                                             {"csr", lm.csr.to_string()},
                                             {"isr", lm.isr.to_string()}};
    }
    out << json{{"samples", m.sample_count},
                {"csr", m.csr.to_string()},
                {"isr", m.isr.to_string()},
                {"levels", levels}}
               .dump(2)
        << "\n";
    return kExitOk;
  }
  out << "scope    samples  CSR       ISR\n";
  auto row = [&](const std::string& name, std::size_t n, const Rational& csr, const Rational& isr) {
    out << std::left << std::setw(9) << name << std::setw(9) << n << std::setw(10) << fixed(csr.to_double())
        << fixed(isr.to_double()) << "\n";
  };
  row("overall", m.sample_count, m.csr, m.isr);
  for (int level = 1; level <= 5; ++level) {
    auto it = m.per_level.find(level);
    if (it == m.per_level.end()) {
      out << std::left << std::setw(9) << ("L" + std::to_string(level)) << std::setw(9) << 0 << std::setw(10)
          << "-" << "-" << "\n";
    } else {
      row("L" + std::to_string(level), it->second.samples, it->second.csr, it->second.isr);
    }
  }
  return kExitOk;
}

int cmd_judge(const Config& c, const std::string& dataset, const std::string& thinking_path,
              const std::string& pattern_name, const std::string& out_path, std::ostream& out) {
  const auto records = read_dataset(dataset);
  const auto pattern = cot_pattern_from_string(pattern_name);
  if (!pattern) throw ArgumentError("unknown pattern '" + pattern_name + "'");
  std::map<std::string, std::string> given;
  if (!thinking_path.empty()) given = read_keyed_text(thinking_path, "thinking");
  auto g = make_gateways(c);
  std::string text;
  for (const auto& r : records) {
    std::string reference, own;
    for (const auto& t : r.cot) {
      if (t.pattern == CotPattern::erg) reference = t.text;
      if (t.pattern == *pattern) own = t.text;
    }
    std::string thinking = own;
    if (!thinking_path.empty()) {
      auto it = given.find(r.id);
      if (it == given.end()) continue;
      thinking = it->second;
    }
    const auto scores = judge_thinking(r.query, reference, thinking, *g.judge);
    json j = {{"id", r.id},
              {"s_logic", scores.s_logic.to_string()},
              {"s_corr", scores.s_corr.to_string()},
              {"r_think", thinking_reward(scores.s_logic, scores.s_corr, c.think).to_string()},
              {"warnings", scores.warnings}};
    text += j.dump() + "\n";
  }
  g.finish();
  emit(out_path, text, out);
  return kExitOk;
}

}  // namespace

std::string serialize_report_line(const ReportLine& l) {
  const bool pass = l.report.satisfied_count == l.report.total_constraints &&
                    std::count(l.report.rubric_verdicts.begin(), l.report.rubric_verdicts.end(), false) == 0;
  json j = {{"id", l.id},
            {"level", l.report.level},
            {"verdict", pass ? "PASS" : "FAIL"},
            {"constraint_verdicts", l.report.constraint_verdicts},
            {"rubric_verdicts", l.report.rubric_verdicts},
            {"observations", l.report.observations}};
  return j.dump();
}

std::vector<ReportLine> parse_report_lines(std::string_view text) {
  std::vector<ReportLine> out;
  for_each_line(text, [&](const json& j, std::size_t line) {
    for (const char* key : {"id", "level", "constraint_verdicts", "rubric_verdicts"}) {
      if (!j.contains(key)) throw ParseError(std::string("missing '") + key + "'", line);
    }
    auto report = make_report(j["constraint_verdicts"].get<std::vector<bool>>(),
                              j["rubric_verdicts"].get<std::vector<bool>>(), j["level"].get<int>());
    if (j.contains("observations")) report.observations = j["observations"].get<std::vector<std::string>>();
    out.push_back({j["id"].get<std::string>(), std::move(report)});
  });
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Settings& env) {
  CLI::App app{"Reasoning-graph instruction synthesis, verification and scoring"};
  app.name("ergkit");
  app.require_subcommand(1);

  Flags synth_flags, verify_flags, score_flags, judge_flags;
  std::string out_path, dataset, responses, use = "canonical", reports, anchor, thinking_scores, thinking,
                        pattern = "erg";
  bool skip_rubrics = false, as_json = false;

  auto* synth = app.add_subcommand("synth", "generate a dataset");
  add_common(synth, synth_flags);
  for (const char* key : {"levels", "count", "seed", "workers", "multi_turn_ratio", "adversarial_ratio", "min_turns",
                          "max_turns"}) {
    for (const auto& [name, help] : config_keys()) {
      if (name == key) add_setting(synth, synth_flags, name, help);
    }
  }
  synth->add_option("--out,-o", out_path, "output dataset file (default stdout)");

  auto* verify = app.add_subcommand("verify", "check responses against a dataset");
  add_common(verify, verify_flags);
  verify->add_option("--dataset,-d", dataset, "dataset file")->required();
  verify->add_option("--responses,-r", responses, "responses file of {\"id\", \"response\"} lines");
  verify->add_option("--use", use, "bundled response to check when --responses is absent")
      ->check(CLI::IsMember({"canonical", "mutated"}));
  verify->add_flag("--skip-rubrics", skip_rubrics, "do not judge rubrics");
  verify->add_option("--out,-o", out_path, "report file (default stdout)");

  auto* score = app.add_subcommand("score", "reward breakdown per report");
  add_common(score, score_flags);
  for (const char* key : {"alpha", "w_l", "w_c"}) {
    for (const auto& [name, help] : config_keys()) {
      if (name == key) add_setting(score, score_flags, name, help);
    }
  }
  score->add_option("--reports", reports, "verify reports")->required();
  score->add_option("--anchor", anchor, "verify reports of the anchor response");
  score->add_option("--thinking-scores", thinking_scores, "judge output with s_logic and s_corr");
  score->add_option("--out,-o", out_path, "output file (default stdout)");

  auto* report = app.add_subcommand("report", "CSR and ISR overall and per level");
  report->add_option("--reports", reports, "verify reports")->required();
  report->add_flag("--json", as_json, "print JSON");

  auto* judge = app.add_subcommand("judge", "checklist-judge thinking traces");
  add_common(judge, judge_flags);
  for (const char* key : {"alpha", "w_l", "w_c"}) {
    for (const auto& [name, help] : config_keys()) {
      if (name == key) add_setting(judge, judge_flags, name, help);
    }
  }
  judge->add_option("--dataset,-d", dataset, "dataset file")->required();
  judge->add_option("--thinking", thinking, "traces file of {\"id\", \"thinking\"} lines");
  judge->add_option("--pattern", pattern, "bundled trace to judge when --thinking is absent")
      ->check(CLI::IsMember({"original", "structured", "erg"}));
  judge->add_option("--out,-o", out_path, "output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run 'ergkit --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(resolve(synth_flags, env), out_path, out, err);
    if (*verify) {
      return cmd_verify(resolve(verify_flags, env), dataset, responses, use, skip_rubrics, out_path, out, err);
    }
    if (*score) return cmd_score(resolve(score_flags, env), reports, anchor, thinking_scores, out_path, out);
    if (*report) return cmd_report(reports, as_json, out);
    if (*judge) return cmd_judge(resolve(judge_flags, env), dataset, thinking, pattern, out_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ergkit
