#include "ergkit/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ergkit/error.hpp"

namespace ergkit {

Rational constraint_reward(const VerificationReport& report) {
  if (report.total_constraints == 0) throw UndefinedInputError("constraint reward needs at least one constraint");
  return Rational(static_cast<std::int64_t>(report.satisfied_count), static_cast<std::int64_t>(report.total_constraints));
}

Rational rubric_reward(const VerificationReport& report) {
  if (report.total_rubrics == 0) throw UndefinedInputError("rubric reward needs at least one rubric");
  std::int64_t ok = 0;
  for (bool v : report.rubric_verdicts) ok += v ? 1 : 0;
  return Rational(ok, static_cast<std::int64_t>(report.total_rubrics));
}

Rational multi_turn_reward(std::size_t n, const Rational& r_constr, std::size_t m, const Rational& r_rubric) {
  if (n + m == 0) throw UndefinedInputError("multi-turn reward needs n + m >= 1");
  const Rational rn(static_cast<std::int64_t>(n)), rm(static_cast<std::int64_t>(m));
  return (rn * r_constr + rm * r_rubric) / (rn + rm);
}

Rational task_reward(const VerificationReport& report) {
  const std::size_t n = report.total_constraints, m = report.total_rubrics;
  if (m == 0) return constraint_reward(report);
  const Rational rc = n ? constraint_reward(report) : Rational(0);
  return multi_turn_reward(n, rc, m, rubric_reward(report));
}

ChecklistScores aggregate_checklist(const ChecklistFlags& f) {
  ChecklistScores s;
  const Rational step(1, 5);
  if (!f.no_logic_at_all) {
    for (bool b : {f.no_redundancy, f.no_contradictions, f.no_missing_logic, f.clear_breakdown, f.well_structured}) {
      if (b) s.s_logic += step;
    }
  }
  if (f.backtracking) s.s_corr += step;
  if (f.reflection) s.s_corr += step;
  if (f.no_obvious_errors) s.s_corr += step;
  if (f.detailed_exploration) s.s_corr += Rational(2, 5);
  return s;
}

namespace {

using json = nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view json_body(std::string_view reply) {
  if (auto fence = reply.find("```json"); fence != std::string_view::npos) {
    auto start = fence + 7;
    auto end = reply.find("```", start);
    return reply.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
  }
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return {};
  return reply.substr(open, close - open + 1);
}

Rational read_score(const json& doc, std::string_view key, std::vector<std::string>& warnings) {
  const json* entry = nullptr;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (lower(it.key()) == lower(key)) entry = &it.value();
  }
  if (!entry) throw ProtocolError("judge reply lacks '" + std::string(key) + "'");
  const json& score = entry->is_object() && entry->contains("score") ? (*entry)["score"] : *entry;
  Rational value;
  try {
    if (score.is_number_integer()) {
      value = Rational(score.get<std::int64_t>());
    } else if (score.is_number()) {
      value = Rational::parse(score.dump());
    } else if (score.is_string()) {
      std::string text = score.get<std::string>();
      while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
      value = Rational::parse(text);
    } else {
      throw ProtocolError("score is neither a number nor a string");
    }
  } catch (const ProtocolError&) {
    throw ProtocolError("unreadable score for '" + std::string(key) + "'");
  } catch (const Error&) {
    throw ProtocolError("unreadable score for '" + std::string(key) + "'");
  }
  if (value < Rational(0)) {
    warnings.push_back(std::string(key) + ": score " + value.to_string() + " clamped to 0");
    value = Rational(0);
  } else if (Rational(1) < value) {
    warnings.push_back(std::string(key) + ": score " + value.to_string() + " clamped to 1");
    value = Rational(1);
  }
  return value;
}

}  // namespace

ChecklistScores parse_judge_checklist(std::string_view reply) {
  const auto body = json_body(reply);
  json doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ProtocolError("judge reply is not a JSON object");
  ChecklistScores s;
  s.s_logic = read_score(doc, kLogicalityKey, s.warnings);
  s.s_corr = read_score(doc, kCorrectnessKey, s.warnings);
  return s;
}

void validate(const ThinkConfig& cfg) {
  if (cfg.alpha < Rational(0) || cfg.w_l < Rational(0) || cfg.w_c < Rational(0)) {
    throw ConfigError("thinking reward weights must be non-negative");
  }
  if (cfg.w_l + cfg.w_c != Rational(1)) throw ConfigError("w_l + w_c must equal 1");
}

Rational thinking_reward(const Rational& s_logic, const Rational& s_corr, const ThinkConfig& cfg) {
  return cfg.alpha * (cfg.w_l * s_logic + cfg.w_c * s_corr);
}

Rational partial_reward(const Rational& r_task, const Rational& anchor_r_task) {
  return max(Rational(0), r_task - anchor_r_task);
}

RewardBreakdown total_reward(const Rational& r_task, const std::optional<Rational>& anchor_r_task,
                             const Rational& r_think) {
  RewardBreakdown b;
  b.r_task = r_task;
  b.r_think = r_think;
  b.anchor_r_task = anchor_r_task;
  b.r_ref = anchor_r_task ? partial_reward(r_task, *anchor_r_task) : Rational(0);
  b.r_total = b.r_task + b.r_ref + b.r_think;
  return b;
}

RewardBreakdown score_response(const VerificationReport& report, const std::optional<VerificationReport>& anchor,
                               const Rational& r_think) {
  std::optional<Rational> anchor_task;
  if (anchor) anchor_task = task_reward(*anchor);
  RewardBreakdown b = total_reward(task_reward(report), anchor_task, r_think);
  b.r_constr = report.total_constraints ? constraint_reward(report) : Rational(0);
  b.r_rubric = report.total_rubrics ? rubric_reward(report) : Rational(0);
  return b;
}

MetricsSummary csr_isr(std::span<const VerificationReport> reports) {
  if (reports.empty()) throw UndefinedInputError("CSR/ISR need at least one report");
  MetricsSummary out;
  std::map<int, std::pair<Rational, std::int64_t>> level_csr;
  std::map<int, std::int64_t> level_full;
  Rational csr_sum;
  std::int64_t full = 0;
  for (const auto& r : reports) {
    const std::size_t total = r.total_constraints + r.total_rubrics;
    if (total == 0) throw UndefinedInputError("a sample with no constraints and no rubrics");
    std::int64_t ok = static_cast<std::int64_t>(r.satisfied_count);
    for (bool v : r.rubric_verdicts) ok += v ? 1 : 0;
    const Rational frac(ok, static_cast<std::int64_t>(total));
    const bool all = ok == static_cast<std::int64_t>(total);
    csr_sum += frac;
    full += all ? 1 : 0;
    if (r.level > 0) {
      auto& [sum, count] = level_csr[r.level];
      sum += frac;
      ++count;
      level_full[r.level] += all ? 1 : 0;
    }
  }
  const auto n = static_cast<std::int64_t>(reports.size());
  out.sample_count = reports.size();
  out.csr = csr_sum / Rational(n);
  out.isr = Rational(full, n);
  for (const auto& [level, acc] : level_csr) {
    out.per_level[level] = {acc.first / Rational(acc.second), Rational(level_full[level], acc.second),
                            static_cast<std::size_t>(acc.second)};
  }
  return out;
}

void validate(const SurrogateParams& p) {
  if (!(p.eps_clip > 0)) throw ConfigError("eps_clip must be positive");
  if (!(p.beta >= 0)) throw ConfigError("beta must be non-negative");
  if (!(p.eps_var > 0)) throw ConfigError("eps_var must be positive");
}

GrpoGroup group_advantages(std::span<const double> rewards, double eps_var) {
  if (rewards.size() < 2) throw UndefinedInputError("a GRPO group needs at least two rollouts");
  if (!(eps_var > 0)) throw ConfigError("eps_var must be positive");
  GrpoGroup g;
  g.rewards.assign(rewards.begin(), rewards.end());
  const double n = static_cast<double>(rewards.size());
  double sum = 0;
  for (double r : rewards) sum += r;
  g.mu = sum / n;
  double sq = 0;
  for (double r : rewards) sq += (r - g.mu) * (r - g.mu);
  g.sigma = std::sqrt(sq / n + eps_var);
  for (double r : rewards) g.advantages.push_back((r - g.mu) / g.sigma);
  return g;
}

double grpo_surrogate(const std::vector<std::vector<double>>& ratios, std::span<const double> advantages,
                      std::span<const double> kl, const SurrogateParams& params) {
  validate(params);
  if (ratios.empty()) throw UndefinedInputError("surrogate needs at least one rollout");
  if (advantages.size() != ratios.size() || kl.size() != ratios.size()) {
    throw ArgumentError("ratios, advantages and KL values must have one entry per rollout");
  }
  double total = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i].empty()) throw UndefinedInputError("rollout " + std::to_string(i) + " has no tokens");
    if (kl[i] < 0) throw ArgumentError("KL values must be non-negative");
    const double a = advantages[i];
    double tokens = 0;
    for (double r : ratios[i]) {
      const double clipped = std::clamp(r, 1 - params.eps_clip, 1 + params.eps_clip);
      tokens += std::min(r * a, clipped * a);
    }
    total += tokens / static_cast<double>(ratios[i].size()) - params.beta * kl[i];
  }
  return total / static_cast<double>(ratios.size());
}

}  // namespace ergkit
