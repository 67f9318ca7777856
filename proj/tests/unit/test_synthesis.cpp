#include <doctest.h>

#include <algorithm>

#include "case_study.hpp"
#include "ergkit/random.hpp"
#include "ergkit/synthesis.hpp"

using namespace ergkit;
using namespace ergkit::testing;

namespace {

ConstraintItem item_of(const Erg& g) {
  MockGateway mock;
  return render_constraint_nl(evaluate_graph(g, default_banks()), default_banks(), mock);
}

std::vector<ConstraintItem> case_items() {
  std::vector<ConstraintItem> out;
  for (const auto& g : case_study_graphs()) out.push_back(item_of(g));
  return out;
}

std::string render_reply(const std::string& constraint) {
  return "```json\n{\"gen_reason\": \"x\", \"gen_constraint\": \"" + constraint + "\", \"rubrics\": []}\n```";
}

}  // namespace

TEST_CASE("drawn graphs are valid and drafts do not leak") {
  const auto& banks = default_banks();
  const auto dims = drawable_dimensions(banks);
  REQUIRE(!dims.empty());
  Rng rng(5);
  for (int round = 0; round < 5; ++round) {
    for (auto d : dims) {
      const auto g = draw_erg(banks, d, rng);
      CHECK(validate_graph(g, &banks).empty());
      CHECK(std::any_of(g.nodes.begin(), g.nodes.end(), [&](const ErgNode& n) {
        const auto* c = std::get_if<ConditionPayload>(&n.payload);
        return c && c->dimension == d;
      }));
      CHECK_NOTHROW(evaluate_graph(g, banks));
      const auto draft = draft_constraint(g, banks);
      CHECK(!draft.empty());
      CHECK(!find_leak(draft, g, banks).has_value());
    }
  }
}

TEST_CASE("leak detection") {
  const auto& banks = default_banks();
  const auto g = case_study_length();
  CHECK(!find_leak("Count the letters of the current Cyrillic alphabet and double it.", g, banks));
  CHECK(find_leak("Take the number of letters in the current Cyrillic alphabet, which is 33.", g, banks) ==
        std::optional<std::string>("cyrillic_letters"));
  CHECK(find_leak("4 is the number of symmetry axes of a square.", g, banks) ==
        std::optional<std::string>("square_symmetry_axes"));
  // only the literal answer counts
  CHECK(!find_leak("Four is the number of symmetry axes of a square.", g, banks));
  // digits inside a longer number do not count
  CHECK(!find_leak("Use the number of letters in the current Cyrillic alphabet (see page 334).", g, banks));
}

TEST_CASE("rendering through a gateway") {
  const auto& banks = default_banks();
  const auto ec = evaluate_graph(case_study_length(), banks);

  MockGateway mock;
  const auto item = render_constraint_nl(ec, banks, mock);
  CHECK(item.text == draft_constraint(ec.source, banks));
  CHECK(item.predicate == compile_constraint(ec));
  CHECK(!item.evaluated.rubric.empty());

  ScriptedGateway leaky({render_reply("Use the number of letters in the current Cyrillic alphabet, 33, twice.")});
  CHECK_THROWS_AS(render_constraint_nl(ec, banks, leaky), LeakageError);
  ScriptedGateway missing({"```json\n{\"gen_reason\": \"x\"}\n```"});
  CHECK_THROWS_AS(render_constraint_nl(ec, banks, missing), ProtocolError);
  ScriptedGateway empty({render_reply("  ")});
  CHECK_THROWS_AS(render_constraint_nl(ec, banks, empty), ProtocolError);

  ScriptedGateway ok({render_reply("Keep the length between twice the Cyrillic letter count minus two and more.")});
  CHECK(render_constraint_nl(ec, banks, ok).text.starts_with("Keep the length"));
  REQUIRE(ok.requests().size() == 1);
  CHECK(ok.requests()[0].purpose == "render_constraint");
  CHECK(ok.requests()[0].messages.back().content.find("graph_mermaid") != std::string::npos);
}

TEST_CASE("consistency filter") {
  ScriptedGateway judge({"Yes", " no. ", "YES!", "Maybe", ""});
  CHECK(filter_consistency("c", judge).accept);
  CHECK(!filter_consistency("c", judge).accept);
  CHECK(filter_consistency("c", judge).accept);
  const auto maybe = filter_consistency("c", judge);
  CHECK(!maybe.accept);
  CHECK(maybe.reason == "unparseable verdict");
  CHECK(!filter_consistency("c", judge).accept);
  CHECK(judge.requests()[0].messages.back().content.find('c') != std::string::npos);
}

TEST_CASE("compatible selection") {
  const std::vector<std::string> cands = {"a", "b", "c", "d"};
  ScriptedGateway judge({R"({"selected_idx": [2, 0]})", "```json\n{\"selected_idx\": [4]}\n```",
                         R"({"selected_idx": [1, 1]})", R"({"selected_idx": [0, 1, 2]})", R"({"picked": []})",
                         R"({"selected_idx": ["0"]})"});
  CHECK(select_compatible(cands, 2, judge) == std::vector<std::size_t>{2, 0});
  CHECK_THROWS_AS(select_compatible(cands, 2, judge), ProtocolError);
  CHECK_THROWS_AS(select_compatible(cands, 2, judge), ProtocolError);
  CHECK_THROWS_AS(select_compatible(cands, 2, judge), ProtocolError);
  CHECK_THROWS_AS(select_compatible(cands, 2, judge), ProtocolError);
  CHECK_THROWS_AS(select_compatible(cands, 2, judge), ProtocolError);
  CHECK_THROWS_AS(select_compatible(cands, 0, judge), ArgumentError);
  CHECK(select_compatible(std::vector<std::string>{}, 3, judge).empty());

  MockGateway mock;
  const auto picked = select_compatible(cands, 3, mock);
  CHECK(picked.size() <= 3);
  CHECK(picked == select_compatible(cands, 3, mock));
}

TEST_CASE("single-turn composition") {
  auto items = case_items();
  const auto ins = compose_single_turn(items, "How do I start running?");
  CHECK(ins.difficulty == 3);
  CHECK(ins.rendered_prompt.starts_with(kInstructionLead));
  CHECK(ins.rendered_prompt.ends_with("Question: How do I start running?"));
  CHECK(ins.rendered_prompt.find("1. " + items[0].text) != std::string::npos);
  CHECK(ins.rendered_prompt.find("3. " + items[2].text) != std::string::npos);

  CHECK_THROWS_AS(compose_single_turn({}, "q"), ArgumentError);
  std::vector<ConstraintItem> six(6, items[0]);
  CHECK_THROWS_AS(compose_single_turn(six, "q"), ArgumentError);
  six.pop_back();
  CHECK(compose_single_turn(six, "q").difficulty == 5);
}

TEST_CASE("system dialogues") {
  MockGateway mock;
  const auto items = case_items();
  const auto d = build_system_dialogue(items, "How do I learn chess?", 2, mock);
  REQUIRE(d.turns.size() == 5);
  CHECK(d.turns[0].role == "system");
  CHECK(d.turns[1].text == "How do I learn chess?");
  CHECK(d.turns[2].role == "assistant");
  CHECK(d.turns[3].role == "user");
  CHECK(d.priority == PriorityRule::system_first);
  CHECK(active_constraints(d, 4) == std::vector<std::size_t>{0, 1, 2});
  CHECK(d == build_system_dialogue(items, "How do I learn chess?", 2, mock));
  CHECK_THROWS_AS(build_system_dialogue({}, "q", 1, mock), ArgumentError);
  CHECK_THROWS_AS(build_system_dialogue(items, "q", 0, mock), ArgumentError);
}

TEST_CASE("accumulated dialogues put the newest constraints first") {
  MockGateway mock;
  const auto items = case_items();
  const ConstraintSchedule schedule = {{0, {items[0]}}, {4, {items[1], items[2]}}};
  const auto d = build_accumulated_dialogue(schedule, "Plan a garden", mock);
  REQUIRE(d.turns.size() == 6);
  CHECK(d.turns[0].text.starts_with("Plan a garden"));
  CHECK(d.turns[4].text.find(items[2].text) != std::string::npos);
  CHECK(d.priority == PriorityRule::newest_first);
  CHECK(active_constraints(d, 0) == std::vector<std::size_t>{0});
  CHECK(active_constraints(d, 3) == std::vector<std::size_t>{0});
  CHECK(active_constraints(d, 4) == std::vector<std::size_t>{1, 2, 0});

  CHECK_THROWS_AS(build_accumulated_dialogue({}, "q", mock), ArgumentError);
  CHECK_THROWS_AS(build_accumulated_dialogue({{1, {items[0]}}}, "q", mock), ArgumentError);
  CHECK_THROWS_AS(build_accumulated_dialogue({{0, {}}}, "q", mock), ArgumentError);
}

TEST_CASE("adversarial injection") {
  MockGateway mock;
  const auto items = case_items();
  const auto base = build_system_dialogue(items, "How do I learn chess?", 1, mock);
  for (auto c : adversarial_categories()) {
    CHECK(adversarial_from_string(to_string(c)) == c);
    const auto d = inject_adversarial(base, c, "How do I learn chess?", mock);
    CHECK(d.turns.size() == base.turns.size() + 1);
    CHECK(d.turns.back().role == "user");
    CHECK(d.adversarial == c);
    REQUIRE(d.rubrics.size() == 1);
    CHECK(d.rubrics[0] == adversarial_rubric(c));
  }
  auto open = base;
  open.turns.pop_back();
  const auto replaced = inject_adversarial(open, AdversarialCategory::conflict_defense, "q", mock);
  CHECK(replaced.turns.size() == open.turns.size());
  CHECK(replaced.turns.back().text != open.turns.back().text);

  Dialogue bare;
  CHECK_THROWS_AS(inject_adversarial(bare, AdversarialCategory::conflict_defense, "q", mock), ArgumentError);
  ScriptedGateway blank({"   "});
  CHECK_THROWS_AS(inject_adversarial(base, AdversarialCategory::conflict_defense, "q", blank), ProtocolError);
  CHECK(!adversarial_from_string("bogus"));
}

TEST_CASE("thinking traces") {
  const auto items = case_items();
  const auto erg = expand_erg_cot(items, "q");
  CHECK(erg.pattern == CotPattern::erg);
  CHECK(erg.text.find(kCoordinationHeading) != std::string::npos);
  CHECK(erg.text.find(kSelfCheckHeading) != std::string::npos);

  // length graph: A, B before C, D, E, F and G last
  const auto g = items[2].evaluated.source;
  const auto section = erg.text.substr(erg.text.find("Requirement 3:"));
  const auto body = section.substr(section.find("\nGraph: "));
  auto pos = [&](const std::string& id) {
    const auto it = std::find_if(g.nodes.begin(), g.nodes.end(), [&](const ErgNode& n) { return n.id == id; });
    return body.find(node_mention(*it));
  };
  for (auto id : {"A", "B", "C", "D", "E", "F", "G"}) CHECK(pos(id) != std::string::npos);
  CHECK(pos("A") < pos("C"));
  CHECK(pos("C") < pos("D"));
  CHECK(pos("E") < pos("F"));
  CHECK(pos("B") < pos("F"));
  CHECK(pos("D") < pos("G"));
  CHECK(pos("F") < pos("G"));

  const auto single = expand_erg_cot(std::span(items).first(1), "q");
  CHECK(single.text.find(kCoordinationHeading) == std::string::npos);
  CHECK(single.text.find(kSelfCheckHeading) != std::string::npos);

  CHECK(expand_original(items, "q").pattern == CotPattern::original);
  CHECK(expand_structured(items, "q").pattern == CotPattern::structured);
  CHECK(expand_original(items, "q").text.find("Graph:") == std::string::npos);
  for (auto p : {CotPattern::original, CotPattern::structured, CotPattern::erg}) {
    CHECK(cot_pattern_from_string(to_string(p)) == p);
  }
}

TEST_CASE("templates and queries") {
  for (auto name : {"render_constraint", "select_constraints", "verify_constraint", "erg_cot", "judge_thinking",
                    "judge_rubric", "simulate_user", "simulate_assistant", "adversarial"}) {
    CHECK(!prompt_template(name).empty());
  }
  CHECK(prompt_template("render_constraint").find("gen_constraint") != std::string_view::npos);
  CHECK(prompt_template("select_constraints").find("selected_idx") != std::string_view::npos);
  CHECK_THROWS_AS(prompt_template("nope"), NotFoundError);
  CHECK(fill_template("a {x} b {y} {x}", {{"x", "1"}}) == "a 1 b {y} 1");
  CHECK(fill_template("{open", {{"open", "z"}}) == "{open");
  CHECK(fill_template("{x}", {{"x", "{x}"}}) == "{x}");
  const auto qs = default_queries();
  CHECK(qs.size() >= 10);
  for (const auto& q : qs) CHECK(!q.empty());
}
