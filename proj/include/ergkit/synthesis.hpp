#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergkit/banks.hpp"
#include "ergkit/gateway.hpp"
#include "ergkit/graph.hpp"
#include "ergkit/random.hpp"
#include "ergkit/verifier.hpp"

namespace ergkit {

/// Bumped whenever a prompt template or a draft phrasing changes.
inline constexpr std::string_view kTemplateVersion = "ergkit-templates/1";

// ---------------------------------------------------------------------------
// Recipes: random reasoning graphs per dimension
// ---------------------------------------------------------------------------

/// Knowledge -> arithmetic -> condition graph whose sink binds `dimension`.
/// Values are chosen so the resolved parameters are integers in a range that
/// a response of a few hundred words can meet. Throws CapacityError when the
/// banks lack the facts the dimension needs.
Erg draw_erg(const Banks& banks, Dimension dimension, Rng& rng);

/// Dimensions draw_erg can build from `banks`, in catalogue order.
std::vector<Dimension> drawable_dimensions(const Banks& banks);

/// Natural-language draft that names the knowledge questions and spells
/// out the arithmetic but never states a fact's answer.
std::string draft_constraint(const Erg& erg, const Banks& banks);

/// Id of the first fact whose answer appears (digit- or word-bounded) within
/// 40 characters of a mention of its question; nullopt when clean.
std::optional<std::string> find_leak(std::string_view text, const Erg& erg, const Banks& banks);

inline constexpr std::size_t kLeakWindow = 40;

struct ConstraintItem {
  EvaluatedConstraint evaluated;
  Predicate predicate;
  std::string text;

  friend bool operator==(const ConstraintItem&, const ConstraintItem&) = default;
};

/// Asks the gateway to phrase the draft. Throws LeakageError when the reply
/// gives away an answer, ProtocolError when the reply lacks gen_constraint.
ConstraintItem render_constraint_nl(const EvaluatedConstraint& ec, const Banks& banks, Gateway& gateway);

// ---------------------------------------------------------------------------
// Judge gates
// ---------------------------------------------------------------------------

struct Verdict {
  bool accept = false;
  std::string reason;
};

/// "Yes" accepts, "No" rejects, anything else rejects as "unparseable verdict".
Verdict filter_consistency(std::string_view candidate, Gateway& judge);

/// Indices of at most `k` mutually compatible candidates, in the judge's
/// order. Throws ArgumentError for k = 0 and ProtocolError for bad indices.
std::vector<std::size_t> select_compatible(std::span<const std::string> candidates, std::size_t k, Gateway& judge);

// ---------------------------------------------------------------------------
// Instructions and dialogues
// ---------------------------------------------------------------------------

inline constexpr std::string_view kInstructionLead = "Please answer the user question based on the following requirements:";

struct Instruction {
  std::vector<ConstraintItem> constraints;
  std::string query;
  std::string rendered_prompt;
  int difficulty = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// 1..5 constraints; throws ArgumentError otherwise.
Instruction compose_single_turn(std::vector<ConstraintItem> constraints, std::string query);

enum class PriorityRule { system_first, newest_first };
std::string_view to_string(PriorityRule r) noexcept;
std::optional<PriorityRule> priority_from_string(std::string_view s) noexcept;

enum class AdversarialCategory {
  conflict_defense,
  information_contradiction,
  information_localization,
  information_reasoning,
  instruction_following,
};
std::string_view to_string(AdversarialCategory c) noexcept;
std::optional<AdversarialCategory> adversarial_from_string(std::string_view s) noexcept;
std::span<const AdversarialCategory> adversarial_categories() noexcept;
/// Fixed rubric text attached for each category.
std::string_view adversarial_rubric(AdversarialCategory c) noexcept;

struct Turn {
  std::string role;  // system | user | assistant
  std::string text;
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::vector<Turn> turns;
  std::vector<ConstraintItem> constraints;
  /// Turn index -> indices into `constraints` introduced at that turn.
  std::map<std::size_t, std::vector<std::size_t>> schedule;
  PriorityRule priority = PriorityRule::system_first;
  std::optional<AdversarialCategory> adversarial;
  std::vector<std::string> rubrics;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// System turn with every constraint, then `turns` simulated user/assistant
/// pairs. Throws ArgumentError for no constraints or turns = 0.
Dialogue build_system_dialogue(std::vector<ConstraintItem> constraints, std::string_view query, std::size_t turns,
                               Gateway& gateway);

/// Key: even turn position (0, 2, 4, ...) of the user turn introducing the
/// constraints. Each user turn is followed by a simulated assistant turn.
using ConstraintSchedule = std::map<std::size_t, std::vector<ConstraintItem>>;

/// Throws ArgumentError for an empty schedule or an odd (assistant) position.
Dialogue build_accumulated_dialogue(const ConstraintSchedule& schedule, std::string_view query, Gateway& gateway);

/// Constraints in force after `turn`, highest priority first.
std::vector<std::size_t> active_constraints(const Dialogue& dialogue, std::size_t turn);

/// Replaces the final user turn (appending one when the dialogue ends on an
/// assistant turn) and attaches the category rubric.
Dialogue inject_adversarial(Dialogue dialogue, AdversarialCategory category, std::string_view query,
                            Gateway& gateway);

// ---------------------------------------------------------------------------
// Thinking traces
// ---------------------------------------------------------------------------

enum class CotPattern { original, structured, erg };
std::string_view to_string(CotPattern p) noexcept;
std::optional<CotPattern> cot_pattern_from_string(std::string_view s) noexcept;

struct CotTrace {
  CotPattern pattern = CotPattern::erg;
  std::string text;
  friend bool operator==(const CotTrace&, const CotTrace&) = default;
};

/// Plain restate-and-answer thinking without any graph structure.
CotTrace expand_original(std::span<const ConstraintItem> constraints, std::string_view query);
/// Four fixed steps: understand, list requirements, plan, review.
CotTrace expand_structured(std::span<const ConstraintItem> constraints, std::string_view query);
/// Graph-ordered thinking: one section per constraint walking its nodes in
/// topological order, a coordination section when there are two or more
/// constraints, and a closing self-check.
CotTrace expand_erg_cot(std::span<const ConstraintItem> constraints, std::string_view query);

/// How a node is quoted in an erg trace; tests locate nodes by this string.
std::string node_mention(const ErgNode& node);

inline constexpr std::string_view kCoordinationHeading = "Coordination:";
inline constexpr std::string_view kSelfCheckHeading = "Self-check:";

// ---------------------------------------------------------------------------
// Assets
// ---------------------------------------------------------------------------

/// Prompt template by name (render_constraint, select_constraints,
/// verify_constraint, erg_cot, judge_thinking, judge_rubric, simulate_user,
/// simulate_assistant, adversarial). Throws NotFoundError.
std::string_view prompt_template(std::string_view name);

/// Replaces every "{key}" in `tmpl`; unknown keys stay as written.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Built-in pool of user questions.
std::vector<std::string> default_queries();

}  // namespace ergkit
