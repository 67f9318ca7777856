#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ergkit/banks.hpp"
#include "ergkit/parameter.hpp"
#include "ergkit/rational.hpp"

namespace ergkit {

enum class NodeKind { knowledge, mathematical, conditional };

std::string_view to_string(NodeKind k) noexcept;

struct KnowledgePayload {
  std::string fact_id;
  friend bool operator==(const KnowledgePayload&, const KnowledgePayload&) = default;
};

/// Operands are folded left to right: ((o0 op o1) op o2) ...
/// Empty slots are filled by parent values in edge-declaration order.
struct MathPayload {
  Operation op = Operation::addition;
  std::vector<std::optional<Rational>> operands;
  friend bool operator==(const MathPayload&, const MathPayload&) = default;
};

/// Parameter slots follow the condition's schema; empty slots are filled by
/// value-producing parents in edge-declaration order. Combinators take no
/// parameters and no dimension; their conditional parents become children.
struct ConditionPayload {
  Condition condition = Condition::logical_and;
  std::optional<Dimension> dimension;
  std::vector<std::optional<Parameter>> parameters;
  /// Terms measured by keyword_count (ignored elsewhere).
  std::vector<std::string> terms;
  friend bool operator==(const ConditionPayload&, const ConditionPayload&) = default;
};

using NodePayload = std::variant<KnowledgePayload, MathPayload, ConditionPayload>;

struct ErgNode {
  std::string id;
  NodePayload payload;
  std::string description;

  NodeKind kind() const noexcept { return static_cast<NodeKind>(payload.index()); }
  friend bool operator==(const ErgNode&, const ErgNode&) = default;
};

struct Edge {
  std::string parent;
  std::string child;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Erg {
  std::vector<ErgNode> nodes;
  std::vector<Edge> edges;

  const ErgNode* find(std::string_view id) const noexcept;
  /// Parents of `id` in edge-declaration order.
  std::vector<std::string> parents(std::string_view id) const;
  std::vector<std::string> children(std::string_view id) const;
  /// Conditional nodes without outgoing edges.
  std::vector<std::string> sinks() const;

  friend bool operator==(const Erg&, const Erg&) = default;
};

struct Violation {
  enum class Kind {
    duplicate_node,
    empty_id,
    dangling_edge,
    self_loop,
    duplicate_edge,
    cycle,
    no_sink,
    math_without_parent,
    operand_mismatch,
    knowledge_with_parent,
    unknown_fact,
    bad_condition_edge,
    parameter_mismatch,
    missing_dimension,
  };
  Kind kind;
  std::string subject;  // node id or "parent->child"
  std::string message;
};

std::string_view to_string(Violation::Kind k) noexcept;

/// Empty result means the graph is well formed. When `banks` is given, fact
/// references are checked as well.
std::vector<Violation> validate_graph(const Erg& erg, const Banks* banks = nullptr);

/// Kahn's algorithm with ties broken by smallest node id. Throws
/// IntegrityError on cycles or dangling edges.
std::vector<std::string> topological_order(const Erg& erg);

/// A sink (or combinator child) after evaluation: all parameters literal.
struct ResolvedCondition {
  std::string node_id;
  Condition condition = Condition::logical_and;
  std::optional<Dimension> dimension;
  std::vector<Parameter> parameters;
  std::vector<std::string> terms;
  std::vector<ResolvedCondition> children;

  friend bool operator==(const ResolvedCondition&, const ResolvedCondition&) = default;
};

struct EvaluatedConstraint {
  Erg source;
  /// Value of every knowledge and mathematical node.
  std::map<std::string, NodeValue> resolved;
  /// One entry per sink; several sinks are conjoined.
  std::vector<ResolvedCondition> sinks;
  /// Dimension of the first leaf condition (depth first).
  Dimension dimension = Dimension::paragraph_count;
  std::string rubric;

  friend bool operator==(const EvaluatedConstraint&, const EvaluatedConstraint&) = default;
};

/// Validates, then evaluates in topological order. Throws IntegrityError for
/// ill-formed graphs, NotFoundError for unknown facts and ArithmeticError for
/// division by zero or text used as an arithmetic operand.
EvaluatedConstraint evaluate_graph(const Erg& erg, const Banks& banks);

/// Same, but along a caller-supplied order, which must be a valid topological
/// order of `erg` (ArgumentError otherwise).
EvaluatedConstraint evaluate_graph(const Erg& erg, const Banks& banks, std::span<const std::string> order);

// ---------------------------------------------------------------------------
// Mermaid edge text: "A-->C, B-->C, C-->D"
// ---------------------------------------------------------------------------

struct MermaidGraph {
  std::vector<Edge> edges;
  /// Every node id in order of first appearance (bare declarations included).
  std::vector<std::string> nodes;
};

/// Statements are separated by commas, semicolons or newlines; both "-->" and
/// "->" arrows are accepted, chains like "A-->B-->C" expand to two edges, and
/// an optional leading "graph TD" / "flowchart LR" header is skipped.
/// Throws ParseError carrying the 1-based line.
MermaidGraph parse_mermaid(std::string_view text);

/// Edges in declaration order joined by ", ", followed by nodes that take part
/// in no edge.
std::string render_mermaid(const Erg& erg);

}  // namespace ergkit
