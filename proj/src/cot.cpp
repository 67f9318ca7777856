#include <algorithm>
#include <array>
#include <set>

#include "ergkit/synthesis.hpp"

namespace ergkit {

namespace {

enum class Family { structure, markup, wording, length };

Family family_of(Dimension d) {
  switch (d) {
    case Dimension::paragraph_count:
    case Dimension::sentence_count:
    case Dimension::sentence_type_mix:
    case Dimension::per_paragraph_sentence_counts:
    case Dimension::line_count:
      return Family::structure;
    case Dimension::bold_word_count:
    case Dimension::bold_word_set:
    case Dimension::unordered_list_item_count:
    case Dimension::unordered_list_items:
    case Dimension::numbered_list_item_count:
      return Family::markup;
    case Dimension::keyword_count:
    case Dimension::keyword_set:
    case Dimension::language:
    case Dimension::beginning_of_reply:
    case Dimension::ending_of_reply:
      return Family::wording;
    default:
      return Family::length;
  }
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::structure:
      return "how the text is split into paragraphs, sentences and lines";
    case Family::markup:
      return "bold spans and list items";
    case Family::wording:
      return "which words and script appear";
    case Family::length:
      return "overall length and punctuation";
  }
  return "";
}

const ResolvedCondition* find_condition(const std::vector<ResolvedCondition>& all, std::string_view id) {
  for (const auto& rc : all) {
    if (rc.node_id == id) return &rc;
    if (auto* hit = find_condition(rc.children, id)) return hit;
  }
  return nullptr;
}

std::string step_line(std::size_t k, const ErgNode& node, const EvaluatedConstraint& ec) {
  std::string out = "Step " + std::to_string(k) + ". Node " + node.id + ", " + node_mention(node) + ": ";
  switch (node.kind()) {
    case NodeKind::knowledge: {
      auto it = ec.resolved.find(node.id);
      out += it == ec.resolved.end() ? "no value" : "the answer is " + describe(it->second);
      break;
    }
    case NodeKind::mathematical: {
      std::string inputs;
      for (const auto& p : ec.source.parents(node.id)) {
        auto it = ec.resolved.find(p);
        if (it == ec.resolved.end()) continue;
        inputs += (inputs.empty() ? "" : ", ") + p + " = " + describe(it->second);
      }
      auto it = ec.resolved.find(node.id);
      out += "with " + inputs + " this gives " + (it == ec.resolved.end() ? "no value" : describe(it->second));
      break;
    }
    case NodeKind::conditional: {
      if (const auto* rc = find_condition(ec.sinks, node.id)) {
        out += "the reply must satisfy " + describe(compile_condition(*rc));
      } else {
        out += "no resolved condition";
      }
      break;
    }
  }
  return out + ".\n";
}

}  // namespace

std::string_view to_string(CotPattern p) noexcept {
  switch (p) {
    case CotPattern::original:
      return "original";
    case CotPattern::structured:
      return "structured";
    case CotPattern::erg:
      return "erg";
  }
  return "erg";
}

std::optional<CotPattern> cot_pattern_from_string(std::string_view s) noexcept {
  for (auto p : {CotPattern::original, CotPattern::structured, CotPattern::erg}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string node_mention(const ErgNode& node) { return "\"" + node.description + "\""; }

CotTrace expand_original(std::span<const ConstraintItem> constraints, std::string_view query) {
  std::string text = "The user asks: " + std::string(query) + "\n";
  text += "I have " + std::to_string(constraints.size()) + " requirement" + (constraints.size() == 1 ? "" : "s") +
          " to respect.";
  for (const auto& c : constraints) text += " " + c.text;
  text += "\nI will write an answer that respects them and then reply.";
  return {CotPattern::original, text};
}

CotTrace expand_structured(std::span<const ConstraintItem> constraints, std::string_view query) {
  std::string text = "Step 1. Understand the question: " + std::string(query) + "\n";
  text += "Step 2. List the requirements:\n";
  for (const auto& c : constraints) text += "- " + c.text + "\n";
  text += "Step 3. Plan the answer: fix the layout and the length before writing.\n";
  text += "Step 4. Review: reread the draft against each requirement before replying.";
  return {CotPattern::structured, text};
}

CotTrace expand_erg_cot(std::span<const ConstraintItem> constraints, std::string_view query) {
  std::string text = "Question: " + std::string(query) + "\n";
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& ec = constraints[i].evaluated;
    text += "\nRequirement " + std::to_string(i + 1) + ": " + constraints[i].text + "\n";
    text += "Graph: " + render_mermaid(ec.source) + "\n";
    std::size_t k = 1;
    for (const auto& id : topological_order(ec.source)) {
      if (const auto* node = ec.source.find(id)) text += step_line(k++, *node, ec);
    }
  }

  if (constraints.size() >= 2) {
    text += "\n" + std::string(kCoordinationHeading) + "\n";
    std::array<std::vector<std::size_t>, 4> groups;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      groups[static_cast<std::size_t>(family_of(constraints[i].evaluated.dimension))].push_back(i + 1);
    }
    bool shared = false;
    for (std::size_t f = 0; f < groups.size(); ++f) {
      if (groups[f].size() < 2) continue;
      shared = true;
      text += "- Requirements";
      for (std::size_t j = 0; j < groups[f].size(); ++j) {
        text += (j == 0 ? " " : j + 1 == groups[f].size() ? " and " : ", ") + std::to_string(groups[f][j]);
      }
      text += " all depend on " + std::string(family_name(static_cast<Family>(f))) + ", so I settle them together.\n";
    }
    if (!shared) text += "- The requirements touch separate aspects of the reply, so none of them pull against each other.\n";
    text += "- Drafting order: layout first, then markup, then wording, then trim or pad the length.\n";
  }

  text += "\n" + std::string(kSelfCheckHeading) + "\n";
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    text += "- Requirement " + std::to_string(i + 1) + ": confirm " + describe(constraints[i].predicate) + ".\n";
  }
  text += "- If a check fails, revise that part and run the checks again.";
  return {CotPattern::erg, text};
}

}  // namespace ergkit
