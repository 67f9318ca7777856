#include "ergkit/judge.hpp"

#include <nlohmann/json.hpp>

#include "ergkit/error.hpp"
#include "ergkit/synthesis.hpp"

namespace ergkit {

using json = nlohmann::json;

std::vector<bool> judge_rubrics(std::span<const std::string> rubrics, std::string_view response, Gateway& judge) {
  if (rubrics.empty()) return {};
  const json payload = {{"rubrics", std::vector<std::string>(rubrics.begin(), rubrics.end())},
                        {"response", std::string(response)}};
  ChatRequest r;
  r.purpose = "judge_rubric";
  r.model = judge.model();
  r.messages = {{"user", fill_template(prompt_template("judge_rubric"), {{"payload", payload.dump(2)}})}};
  const auto reply = judge.chat(r).text;
  const auto body = fenced_json(reply);
  json doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) throw ProtocolError("rubric judge reply is not a JSON array");
  if (doc.size() != rubrics.size()) {
    throw ProtocolError("rubric judge returned " + std::to_string(doc.size()) + " verdicts for " +
                        std::to_string(rubrics.size()) + " rubrics");
  }
  std::vector<bool> out;
  for (const auto& v : doc) {
    if (!v.is_object() || !v.contains("score") || !v["score"].is_number()) {
      throw ProtocolError("rubric verdict lacks a numeric score");
    }
    const double s = v["score"].get<double>();
    if (s != 0.0 && s != 1.0) throw ProtocolError("rubric score must be 0 or 1");
    out.push_back(s == 1.0);
  }
  return out;
}

ChecklistScores judge_thinking(std::string_view query, std::string_view reference, std::string_view thinking,
                               Gateway& judge) {
  const json payload = {{"thinking", std::string(thinking)}};
  ChatRequest r;
  r.purpose = "judge_thinking";
  r.model = judge.model();
  r.messages = {{"user", fill_template(prompt_template("judge_thinking"), {{"query", std::string(query)},
                                                                           {"reference", std::string(reference)},
                                                                           {"payload", payload.dump(2)}})}};
  return parse_judge_checklist(judge.chat(r).text);
}

}  // namespace ergkit
