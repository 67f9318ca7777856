#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergkit/analysis.hpp"
#include "ergkit/banks.hpp"
#include "ergkit/graph.hpp"
#include "ergkit/parameter.hpp"

namespace ergkit {

/// Executable form of a resolved condition. Leaves bind a dimension and carry
/// literal parameters; combinators (logical_and / logical_or) carry children.
struct Predicate {
  Condition condition = Condition::logical_and;
  std::optional<Dimension> dimension;
  std::vector<Parameter> parameters;
  /// Terms counted by keyword_count.
  std::vector<std::string> terms;
  std::vector<Predicate> children;

  bool combinator() const noexcept { return kind_of(condition).combinator; }
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Throws CompileError naming the condition/dimension pair when the
/// predicate is not one the verifier can decide.
void check_predicate(const Predicate& p);

Predicate compile_condition(const ResolvedCondition& rc);
/// Several sinks compile to a logical_and over them.
Predicate compile_constraint(const EvaluatedConstraint& ec);

/// Total for every predicate accepted by check_predicate.
bool verify(const Predicate& p, const ResponseMeasurements& m);

/// Non-negative; zero exactly when verify() is true. Counts how far the
/// measurements are from satisfying the predicate (and: sum, or: min).
double violation_distance(const Predicate& p, const ResponseMeasurements& m);

/// Short rendering of the measured values a predicate looks at.
std::string observe(const Predicate& p, const ResponseMeasurements& m);

/// One-line human reading, e.g. "character_count in [64, 103]".
std::string describe(const Predicate& p);

/// Every term the predicates need counted (keyword_count terms and
/// keyword_set items), deduplicated in first-seen order.
std::vector<std::string> keyword_vocabulary(std::span<const Predicate> predicates);

struct VerificationReport {
  std::vector<bool> constraint_verdicts;
  std::vector<bool> rubric_verdicts;
  std::size_t satisfied_count = 0;
  std::size_t total_constraints = 0;
  std::size_t total_rubrics = 0;
  /// Difficulty level of the sample the report belongs to, 0 when unknown.
  int level = 0;
  /// observe() output per constraint, for diagnostics.
  std::vector<std::string> observations;

  friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

/// Builds a report from verdicts alone (satisfied_count and totals derived).
VerificationReport make_report(std::vector<bool> constraint_verdicts, std::vector<bool> rubric_verdicts = {},
                               int level = 0);

/// Measures once and applies every predicate in order. Rubric verdicts come
/// from a judge and are copied into the report.
VerificationReport verify_instruction(std::span<const Predicate> predicates, std::string_view response,
                                      const std::vector<bool>& rubric_verdicts = {}, int level = 0);

// ---------------------------------------------------------------------------
// Portable verifier-spec document
// ---------------------------------------------------------------------------

inline constexpr std::string_view kVerifierSpecFormat = "ergkit-verifier-spec 1";

std::string export_verifier_spec(const Predicate& p);

/// Inverse of export_verifier_spec; throws ParseError with the line number.
Predicate parse_verifier_spec(std::string_view document);

}  // namespace ergkit
