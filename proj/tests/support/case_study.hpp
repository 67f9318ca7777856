#pragma once

// Hand-built graphs for the requirements-document case study and small
// helpers shared by the unit and acceptance suites.

#include <filesystem>
#include <string>
#include <vector>

#include "ergkit/dataset.hpp"
#include "ergkit/error.hpp"
#include "ergkit/graph.hpp"
#include "ergkit/verifier.hpp"

namespace ergkit::testing {

inline std::filesystem::path fixture_path(const std::string& relative) {
  return std::filesystem::path(ERGKIT_FIXTURE_DIR) / relative;
}

inline std::string fixture(const std::string& relative) { return read_text_file(fixture_path(relative)); }

inline ErgNode knowledge(std::string id, std::string fact, std::string desc) {
  return {std::move(id), KnowledgePayload{std::move(fact)}, std::move(desc)};
}

inline ErgNode math(std::string id, Operation op, std::vector<std::optional<Rational>> operands, std::string desc) {
  return {std::move(id), MathPayload{op, std::move(operands)}, std::move(desc)};
}

inline ErgNode condition(std::string id, Condition c, std::optional<Dimension> d,
                         std::vector<std::optional<Parameter>> params, std::string desc) {
  ConditionPayload p;
  p.condition = c;
  p.dimension = d;
  p.parameters = std::move(params);
  return {std::move(id), std::move(p), std::move(desc)};
}

/// Bold count is a positive non-prime odd number and no bold span repeats.
inline Erg case_study_bold() {
  Erg g;
  g.nodes = {
      condition("A", Condition::required, Dimension::bold_word_count, {PropertyList{{Property::positive}}},
                "Bold count is positive"),
      condition("B", Condition::forbidden, Dimension::bold_word_count,
                {PropertyList{{Property::prime, Property::even}}}, "Bold count is neither prime nor even"),
      condition("C", Condition::required, Dimension::bold_word_set, {PropertyList{{Property::distinct}}},
                "Bold spans do not repeat"),
      condition("D", Condition::logical_and, std::nullopt, {}, "All bold rules hold"),
  };
  g.edges = {{"A", "D"}, {"B", "D"}, {"C", "D"}};
  return g;
}

/// Top-level list whose item count differs from the octopus brain count,
/// items unique and strictly ascending by length.
inline Erg case_study_list() {
  Erg g;
  g.nodes = {
      knowledge("A", "octopus_brains", "Recall the number of brains of an octopus"),
      condition("B", Condition::not_equal_to, Dimension::unordered_list_item_count, {std::nullopt},
                "List item count differs from A"),
      condition("C", Condition::required, Dimension::unordered_list_items, {PropertyList{{Property::distinct}}},
                "List items are unique"),
      condition("D", Condition::strictly_ascending_by_length, Dimension::unordered_list_items, {},
                "List items grow in length"),
      condition("E", Condition::logical_and, std::nullopt, {}, "All list rules hold"),
  };
  g.edges = {{"A", "B"}, {"B", "E"}, {"C", "E"}, {"D", "E"}};
  return g;
}

/// Character count between cyrillic * 2 - 2 and cyrillic * 3 + square axes.
inline Erg case_study_length() {
  Erg g;
  g.nodes = {
      knowledge("A", "cyrillic_letters", "Recall the number of letters in the current Cyrillic alphabet"),
      knowledge("B", "square_symmetry_axes", "Recall the number of symmetry axes of a square"),
      math("C", Operation::multiplication, {std::nullopt, Rational(2)}, "Multiply A by 2"),
      math("D", Operation::subtraction, {std::nullopt, Rational(2)}, "Subtract 2 from C"),
      math("E", Operation::multiplication, {std::nullopt, Rational(3)}, "Multiply A by 3"),
      math("F", Operation::addition, {std::nullopt, std::nullopt}, "Add B to E"),
      condition("G", Condition::interval, Dimension::character_count, {std::nullopt, std::nullopt},
                "Character count lies in [D, F]"),
  };
  g.edges = {{"A", "C"}, {"C", "D"}, {"A", "E"}, {"E", "F"}, {"B", "F"}, {"D", "G"}, {"F", "G"}};
  return g;
}

inline std::vector<Erg> case_study_graphs() { return {case_study_bold(), case_study_list(), case_study_length()}; }

inline std::vector<Predicate> case_study_predicates(const Banks& banks) {
  std::vector<Predicate> out;
  for (const auto& g : case_study_graphs()) out.push_back(compile_constraint(evaluate_graph(g, banks)));
  return out;
}

}  // namespace ergkit::testing
