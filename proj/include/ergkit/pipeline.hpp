#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ergkit/dataset.hpp"
#include "ergkit/planner.hpp"

namespace ergkit {

struct SynthOptions {
  std::vector<int> levels{1, 2, 3, 4, 5};
  /// Records per level.
  std::size_t count = 10;
  std::uint64_t seed = 0;
  double multi_turn_ratio = 0.3;
  /// Share of multi-turn records whose final user turn is adversarial.
  double adversarial_ratio = 0.3;
  std::size_t min_turns = 1;
  std::size_t max_turns = 3;
  /// Extra candidates drawn per instruction for the compatibility judge.
  std::size_t spare_candidates = 2;
  std::size_t max_attempts = 48;
  /// Ceiling on concurrent records (and so on concurrent gateway calls).
  std::size_t workers = 4;
  /// Empty means default_queries().
  std::vector<std::string> queries;
  PlannerOptions planner;
};

/// Throws ArgumentError for levels outside 1..5, ratios outside [0, 1],
/// zero workers or max_turns < min_turns.
void validate(const SynthOptions& options);

/// Record `index` of `level`. Depends only on (banks, options, level, index)
/// and the gateways' replies. Throws CapacityError when no instruction
/// with a planned response pair is found within max_attempts.
DatasetRecord synthesize_record(const Banks& banks, Gateway& generator, Gateway& judge, const SynthOptions& options,
                                int level, std::size_t index);

/// Every level in order, `count` records each; output order does not depend
/// on the number of workers. Gateways must be safe to call concurrently.
std::vector<DatasetRecord> synthesize(const Banks& banks, Gateway& generator, Gateway& judge,
                                      const SynthOptions& options);

}  // namespace ergkit
