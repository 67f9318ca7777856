#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "ergkit/verifier.hpp"

namespace ergkit {

/// Builds responses with known verdicts for a set of compiled constraints.
/// A response is rendered from structural knobs (paragraphs, sentences,
/// bold spans, list items, inserted tokens, script) and the knobs are tuned
/// by seeded local search on the verifier's violation distance, so the result
/// is checked by the same code that grades model output.
struct PlannerOptions {
  std::size_t max_iterations = 4000;
  std::size_t restarts = 4;
};

struct PlannedPair {
  std::string canonical;
  std::string mutated;
  /// Index of the single constraint the mutated response violates.
  std::size_t broken = 0;
};

/// A response satisfying every predicate, or nullopt when search fails.
std::optional<std::string> plan_satisfying(std::span<const Predicate> predicates, std::uint64_t seed,
                                           const PlannerOptions& options = {});

/// Canonical response plus a variant that violates exactly one predicate.
/// Targets are tried starting from `seed`-chosen index; nullopt when no
/// target can be broken in isolation or the canonical search fails.
std::optional<PlannedPair> plan_pair(std::span<const Predicate> predicates, std::uint64_t seed,
                                     const PlannerOptions& options = {});

/// Predicate that holds exactly when `p` fails, when one can be written with
/// the same vocabulary (counts and combinators); nullopt otherwise.
std::optional<Predicate> negate(const Predicate& p);

}  // namespace ergkit
