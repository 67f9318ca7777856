#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergkit/gateway.hpp"
#include "ergkit/scoring.hpp"

namespace ergkit {

/// One verdict per rubric, in order. Throws ProtocolError when the reply is
/// not an array of {"<i>-reason", "score"} objects of the right length.
std::vector<bool> judge_rubrics(std::span<const std::string> rubrics, std::string_view response, Gateway& judge);

/// Checklist scores for `thinking` against a reference trace.
ChecklistScores judge_thinking(std::string_view query, std::string_view reference, std::string_view thinking,
                               Gateway& judge);

}  // namespace ergkit
