#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergkit/rational.hpp"
#include "ergkit/verifier.hpp"

namespace ergkit {

// ---------------------------------------------------------------------------
// Task rewards
// ---------------------------------------------------------------------------

/// satisfied / n over the code-checked constraints. n = 0 is undefined.
Rational constraint_reward(const VerificationReport& report);
/// true rubrics / m. m = 0 is undefined.
Rational rubric_reward(const VerificationReport& report);
/// (n * r_constr + m * r_rubric) / (n + m).
Rational multi_turn_reward(std::size_t n, const Rational& r_constr, std::size_t m, const Rational& r_rubric);

/// r_constr when the report has no rubrics, the combined reward otherwise.
Rational task_reward(const VerificationReport& report);

// ---------------------------------------------------------------------------
// Thinking reward
// ---------------------------------------------------------------------------

struct ChecklistFlags {
  bool no_redundancy = false;
  bool no_contradictions = false;
  bool no_missing_logic = false;
  bool clear_breakdown = false;
  bool well_structured = false;
  bool no_logic_at_all = false;

  bool backtracking = false;          // +0.2
  bool reflection = false;            // +0.2
  bool no_obvious_errors = false;     // +0.2
  bool detailed_exploration = false;  // +0.4

  friend bool operator==(const ChecklistFlags&, const ChecklistFlags&) = default;
};

struct ChecklistScores {
  Rational s_logic;
  Rational s_corr;
  /// Notes about clamped or unreadable judge scores.
  std::vector<std::string> warnings;
};

ChecklistScores aggregate_checklist(const ChecklistFlags& flags);

/// Reads a judge reply in the two-dimension JSON schema ("Logicality of the
/// thought process" / "Correctness and detail of the thought process", each
/// with "reason" and "score"). Accepts fenced or bare JSON; key matching is
/// case-insensitive. Scores outside [0, 1] are clamped and noted. Throws
/// ProtocolError when no score can be read.
ChecklistScores parse_judge_checklist(std::string_view reply);

inline constexpr std::string_view kLogicalityKey = "Logicality of the thought process";
inline constexpr std::string_view kCorrectnessKey = "Correctness and detail of the thought process";

struct ThinkConfig {
  Rational alpha{1, 5};
  Rational w_l{1, 2};
  Rational w_c{1, 2};
};

/// Throws ConfigError unless weights are non-negative and sum to one.
void validate(const ThinkConfig& cfg);

Rational thinking_reward(const Rational& s_logic, const Rational& s_corr, const ThinkConfig& cfg = {});

// ---------------------------------------------------------------------------
// Partial and total reward
// ---------------------------------------------------------------------------

/// max(0, r_task - anchor).
Rational partial_reward(const Rational& r_task, const Rational& anchor_r_task);

struct RewardBreakdown {
  Rational r_constr;
  Rational r_rubric;
  Rational r_task;
  Rational r_think;
  Rational r_ref;
  Rational r_total;
  std::optional<Rational> anchor_r_task;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

/// r_total = r_task + r_ref + r_think, with r_ref = 0 when there is no anchor.
RewardBreakdown total_reward(const Rational& r_task, const std::optional<Rational>& anchor_r_task,
                             const Rational& r_think);

/// Full stack for one response. r_constr / r_rubric are zero for empty halves.
RewardBreakdown score_response(const VerificationReport& report, const std::optional<VerificationReport>& anchor,
                               const Rational& r_think);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct LevelMetrics {
  Rational csr;
  Rational isr;
  std::size_t samples = 0;
  friend bool operator==(const LevelMetrics&, const LevelMetrics&) = default;
};

struct MetricsSummary {
  Rational csr;
  Rational isr;
  /// Keyed by report level (1..5); reports with level 0 only count overall.
  std::map<int, LevelMetrics> per_level;
  std::size_t sample_count = 0;
};

/// CSR: mean per-sample fraction of satisfied constraints and rubrics.
/// ISR: fraction of samples where all of them hold.
MetricsSummary csr_isr(std::span<const VerificationReport> reports);

// ---------------------------------------------------------------------------
// GRPO
// ---------------------------------------------------------------------------

struct SurrogateParams {
  double eps_clip = 0.2;
  double beta = 1e-3;
  double eps_var = 1e-8;
};

void validate(const SurrogateParams& params);

struct GrpoGroup {
  std::vector<double> rewards;
  double mu = 0;
  double sigma = 0;
  std::vector<double> advantages;
};

/// sigma = sqrt(population variance + eps_var). G < 2 is undefined.
GrpoGroup group_advantages(std::span<const double> rewards, double eps_var = SurrogateParams{}.eps_var);

/// Mean over rollouts of the token-mean clipped surrogate minus beta times the
/// rollout's KL value (one KL value per rollout).
double grpo_surrogate(const std::vector<std::vector<double>>& ratios, std::span<const double> advantages,
                      std::span<const double> kl, const SurrogateParams& params = {});

}  // namespace ergkit
