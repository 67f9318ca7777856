#include "ergkit/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <unordered_map>

#include "ergkit/error.hpp"

namespace ergkit {

std::string_view to_string(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::knowledge:
      return "knowledge";
    case NodeKind::mathematical:
      return "mathematical";
    case NodeKind::conditional:
      return "conditional";
  }
  return "unknown";
}

std::string_view to_string(Violation::Kind k) noexcept {
  using K = Violation::Kind;
  switch (k) {
    case K::duplicate_node:
      return "duplicate_node";
    case K::empty_id:
      return "empty_id";
    case K::dangling_edge:
      return "dangling_edge";
    case K::self_loop:
      return "self_loop";
    case K::duplicate_edge:
      return "duplicate_edge";
    case K::cycle:
      return "cycle";
    case K::no_sink:
      return "no_sink";
    case K::math_without_parent:
      return "math_without_parent";
    case K::operand_mismatch:
      return "operand_mismatch";
    case K::knowledge_with_parent:
      return "knowledge_with_parent";
    case K::unknown_fact:
      return "unknown_fact";
    case K::bad_condition_edge:
      return "bad_condition_edge";
    case K::parameter_mismatch:
      return "parameter_mismatch";
    case K::missing_dimension:
      return "missing_dimension";
  }
  return "unknown";
}

const ErgNode* Erg::find(std::string_view id) const noexcept {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<std::string> Erg::parents(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& e : edges) {
    if (e.child == id) out.push_back(e.parent);
  }
  return out;
}

std::vector<std::string> Erg::children(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& e : edges) {
    if (e.parent == id) out.push_back(e.child);
  }
  return out;
}

std::vector<std::string> Erg::sinks() const {
  std::vector<std::string> out;
  for (const auto& n : nodes) {
    if (n.kind() != NodeKind::conditional) continue;
    bool has_child = std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.parent == n.id; });
    if (!has_child) out.push_back(n.id);
  }
  return out;
}

namespace {

std::size_t empty_slots(const ErgNode& node) {
  if (const auto* m = std::get_if<MathPayload>(&node.payload)) {
    return static_cast<std::size_t>(std::count(m->operands.begin(), m->operands.end(), std::nullopt));
  }
  if (const auto* c = std::get_if<ConditionPayload>(&node.payload)) {
    return static_cast<std::size_t>(std::count(c->parameters.begin(), c->parameters.end(), std::nullopt));
  }
  return 0;
}

// Kahn over the edges whose endpoints exist; returns the order and leaves
// unprocessed nodes (those on or behind a cycle) out of it.
std::vector<std::string> kahn(const Erg& erg) {
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& n : erg.nodes) indegree.emplace(n.id, 0);
  std::set<Edge> seen;
  for (const auto& e : erg.edges) {
    if (!indegree.count(e.parent) || !indegree.count(e.child)) continue;
    if (!seen.insert(e).second) continue;
    ++indegree[e.child];
    out[e.parent].push_back(e.child);
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push(id);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& child : out[id]) {
      if (--indegree[child] == 0) ready.push(child);
    }
  }
  return order;
}

}  // namespace

std::vector<Violation> validate_graph(const Erg& erg, const Banks* banks) {
  using K = Violation::Kind;
  std::vector<Violation> v;
  std::set<std::string> ids;
  for (const auto& n : erg.nodes) {
    if (n.id.empty()) v.push_back({K::empty_id, "", "node with empty id"});
    if (!ids.insert(n.id).second) v.push_back({K::duplicate_node, n.id, "node id '" + n.id + "' declared twice"});
  }

  std::set<Edge> seen;
  for (const auto& e : erg.edges) {
    const std::string subject = e.parent + "->" + e.child;
    if (!ids.count(e.parent) || !ids.count(e.child)) {
      const std::string& missing = ids.count(e.parent) ? e.child : e.parent;
      v.push_back({K::dangling_edge, subject, "edge " + subject + " names absent node '" + missing + "'"});
      continue;
    }
    if (e.parent == e.child) v.push_back({K::self_loop, subject, "self loop on '" + e.parent + "'"});
    if (!seen.insert(e).second) v.push_back({K::duplicate_edge, subject, "edge " + subject + " declared twice"});
  }

  auto order = kahn(erg);
  if (order.size() < ids.size()) {
    std::set<std::string> done(order.begin(), order.end());
    std::string members;
    for (const auto& id : ids) {
      if (done.count(id)) continue;
      if (!members.empty()) members += ", ";
      members += id;
    }
    v.push_back({K::cycle, members, "cycle through {" + members + "}"});
  }

  for (const auto& node : erg.nodes) {
    std::vector<const ErgNode*> parents;
    for (const auto& p : erg.parents(node.id)) {
      if (const auto* pn = erg.find(p)) parents.push_back(pn);
    }
    const auto value_parents = static_cast<std::size_t>(std::count_if(
        parents.begin(), parents.end(), [](const ErgNode* p) { return p->kind() != NodeKind::conditional; }));
    const std::size_t cond_parents = parents.size() - value_parents;

    switch (node.kind()) {
      case NodeKind::knowledge: {
        if (!parents.empty()) {
          v.push_back({K::knowledge_with_parent, node.id, "knowledge node '" + node.id + "' has parents"});
        }
        const auto& fact = std::get<KnowledgePayload>(node.payload).fact_id;
        if (banks && !banks->find_fact(fact)) {
          v.push_back({K::unknown_fact, node.id, "knowledge node '" + node.id + "' references unknown fact '" + fact + "'"});
        }
        break;
      }
      case NodeKind::mathematical: {
        const auto& m = std::get<MathPayload>(node.payload);
        if (parents.empty()) {
          v.push_back({K::math_without_parent, node.id, "mathematical node '" + node.id + "' has no parent"});
        }
        if (cond_parents) {
          v.push_back({K::bad_condition_edge, node.id, "mathematical node '" + node.id + "' consumes a conditional node"});
        }
        if (m.operands.size() < 2 || empty_slots(node) != value_parents) {
          v.push_back({K::operand_mismatch, node.id,
                       "mathematical node '" + node.id + "' has " + std::to_string(m.operands.size()) +
                           " operands with " + std::to_string(empty_slots(node)) + " open slots for " +
                           std::to_string(value_parents) + " parents"});
        }
        break;
      }
      case NodeKind::conditional: {
        const auto& c = std::get<ConditionPayload>(node.payload);
        const auto& kind = kind_of(c.condition);
        for (const auto& child : erg.children(node.id)) {
          const auto* cn = erg.find(child);
          if (!cn) continue;
          bool ok = cn->kind() == NodeKind::conditional && kind_of(std::get<ConditionPayload>(cn->payload).condition).combinator;
          if (!ok) {
            v.push_back({K::bad_condition_edge, node.id + "->" + child,
                         "conditional node '" + node.id + "' may only feed a combinator"});
          }
        }
        if (kind.combinator) {
          if (c.dimension || !c.parameters.empty()) {
            v.push_back({K::parameter_mismatch, node.id, "combinator '" + node.id + "' takes no dimension or parameters"});
          }
          if (value_parents) {
            v.push_back({K::bad_condition_edge, node.id, "combinator '" + node.id + "' consumes a value node"});
          }
          if (cond_parents == 0) {
            v.push_back({K::parameter_mismatch, node.id, "combinator '" + node.id + "' has no child conditions"});
          }
        } else {
          if (!c.dimension) {
            v.push_back({K::missing_dimension, node.id, "conditional node '" + node.id + "' binds no dimension"});
          }
          if (cond_parents) {
            v.push_back({K::bad_condition_edge, node.id,
                         "conditional node '" + node.id + "' consumes a conditional node but is not a combinator"});
          }
          if (c.parameters.size() != kind.arity() || empty_slots(node) != value_parents) {
            v.push_back({K::parameter_mismatch, node.id,
                         "conditional node '" + node.id + "' (" + std::string(kind.name) + ") expects " +
                             std::to_string(kind.arity()) + " parameters, has " +
                             std::to_string(c.parameters.size()) + " with " + std::to_string(empty_slots(node)) +
                             " open slots for " + std::to_string(value_parents) + " parents"});
          }
        }
        break;
      }
    }
  }

  if (erg.sinks().empty()) v.push_back({K::no_sink, "", "graph has no conditional sink"});
  return v;
}

std::vector<std::string> topological_order(const Erg& erg) {
  for (const auto& e : erg.edges) {
    if (!erg.find(e.parent) || !erg.find(e.child)) {
      throw IntegrityError("edge " + e.parent + "->" + e.child + " names an absent node");
    }
  }
  auto order = kahn(erg);
  if (order.size() < erg.nodes.size()) throw IntegrityError("graph contains a cycle");
  return order;
}

namespace {

Parameter to_parameter(const NodeValue& value, ValueKind kind, const std::string& node_id) {
  const auto* number = std::get_if<Rational>(&value);
  switch (kind) {
    case ValueKind::number:
    case ValueKind::number_or_dimension:
      if (!number) throw IntegrityError("node '" + node_id + "' needs a number but a parent supplies text");
      return *number;
    case ValueKind::scalar:
      if (number) return *number;
      return std::get<std::string>(value);
    case ValueKind::membership:
      if (number) throw IntegrityError("node '" + node_id + "' needs text items but a parent supplies a number");
      return TextList{{std::get<std::string>(value)}};
  }
  throw IntegrityError("unreachable parameter kind");
}

Rational apply(Operation op, const Rational& a, const Rational& b) {
  switch (op) {
    case Operation::addition:
      return a + b;
    case Operation::subtraction:
      return a - b;
    case Operation::multiplication:
      return a * b;
    case Operation::division:
      if (b == Rational(0)) throw ArithmeticError("division by zero");
      return a / b;
  }
  return a;
}

const ResolvedCondition* first_leaf(const ResolvedCondition& c) {
  if (c.dimension) return &c;
  for (const auto& child : c.children) {
    if (const auto* leaf = first_leaf(child)) return leaf;
  }
  return nullptr;
}

EvaluatedConstraint evaluate_along(const Erg& erg, const Banks& banks, std::span<const std::string> order) {
  EvaluatedConstraint out;
  out.source = erg;
  std::unordered_map<std::string, ResolvedCondition> conditions;

  for (const auto& id : order) {
    const ErgNode& node = *erg.find(id);
    const auto parents = erg.parents(id);
    switch (node.kind()) {
      case NodeKind::knowledge: {
        const auto& fact = lookup_fact(banks, std::get<KnowledgePayload>(node.payload).fact_id);
        if (fact.is_numeric()) {
          out.resolved[id] = Rational(std::get<std::int64_t>(fact.answer));
        } else {
          out.resolved[id] = std::get<std::string>(fact.answer);
        }
        break;
      }
      case NodeKind::mathematical: {
        const auto& m = std::get<MathPayload>(node.payload);
        std::vector<Rational> operands;
        std::size_t next = 0;
        for (const auto& slot : m.operands) {
          if (slot) {
            operands.push_back(*slot);
            continue;
          }
          const NodeValue& v = out.resolved.at(parents.at(next++));
          const auto* r = std::get_if<Rational>(&v);
          if (!r) throw ArithmeticError("node '" + id + "': text value used as an arithmetic operand");
          operands.push_back(*r);
        }
        Rational acc = operands.front();
        for (std::size_t i = 1; i < operands.size(); ++i) {
          try {
            acc = apply(m.op, acc, operands[i]);
          } catch (const ArithmeticError& e) {
            throw ArithmeticError("node '" + id + "': " + e.what());
          }
        }
        out.resolved[id] = acc;
        break;
      }
      case NodeKind::conditional: {
        const auto& c = std::get<ConditionPayload>(node.payload);
        const auto& kind = kind_of(c.condition);
        ResolvedCondition rc;
        rc.node_id = id;
        rc.condition = c.condition;
        rc.dimension = c.dimension;
        rc.terms = c.terms;
        if (kind.combinator) {
          for (const auto& p : parents) rc.children.push_back(conditions.at(p));
        } else {
          std::size_t next = 0;
          for (std::size_t i = 0; i < c.parameters.size(); ++i) {
            if (c.parameters[i]) {
              rc.parameters.push_back(*c.parameters[i]);
            } else {
              rc.parameters.push_back(to_parameter(out.resolved.at(parents.at(next++)), kind.parameters[i].kind, id));
            }
          }
        }
        conditions.emplace(id, std::move(rc));
        break;
      }
    }
  }

  for (const auto& sink : erg.sinks()) out.sinks.push_back(conditions.at(sink));
  for (const auto& s : out.sinks) {
    if (const auto* leaf = first_leaf(s)) {
      out.dimension = *leaf->dimension;
      break;
    }
  }
  return out;
}

// Fact references are left to evaluation so they surface as NotFoundError.
void require_valid(const Erg& erg) {
  auto violations = validate_graph(erg, nullptr);
  if (violations.empty()) return;
  std::string msg = "invalid reasoning graph:";
  for (const auto& v : violations) msg += " [" + std::string(to_string(v.kind)) + "] " + v.message + ";";
  throw IntegrityError(msg);
}

}  // namespace

EvaluatedConstraint evaluate_graph(const Erg& erg, const Banks& banks) {
  require_valid(erg);
  const auto order = topological_order(erg);
  return evaluate_along(erg, banks, order);
}

EvaluatedConstraint evaluate_graph(const Erg& erg, const Banks& banks, std::span<const std::string> order) {
  require_valid(erg);
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!erg.find(order[i]) || !position.emplace(order[i], i).second) {
      throw ArgumentError("order is not a permutation of the graph's nodes");
    }
  }
  if (position.size() != erg.nodes.size()) throw ArgumentError("order is not a permutation of the graph's nodes");
  for (const auto& e : erg.edges) {
    if (position[e.parent] > position[e.child]) {
      throw ArgumentError("order places " + e.child + " before its parent " + e.parent);
    }
  }
  return evaluate_along(erg, banks, order);
}

}  // namespace ergkit
