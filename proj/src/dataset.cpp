#include "ergkit/dataset.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ergkit/error.hpp"

namespace ergkit {

using json = nlohmann::json;

namespace {

// Conversion failures inside a record surface as this and are re-thrown as
// ParseError with the line number.
struct BadRecord : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const json& at(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw BadRecord(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string str(const json& j, const char* key) {
  const auto& v = at(j, key);
  if (!v.is_string()) throw BadRecord(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t integer(const json& j, const char* key) {
  const auto& v = at(j, key);
  if (!v.is_number_integer()) throw BadRecord(std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::uint64_t unsigned_integer(const json& j, const char* key) {
  const auto& v = at(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw BadRecord(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

const json& array(const json& j, const char* key) {
  const auto& v = at(j, key);
  if (!v.is_array()) throw BadRecord(std::string("field '") + key + "' must be an array");
  return v;
}

template <class T, class F>
T named(const json& j, const char* key, F from_string) {
  const auto s = str(j, key);
  auto v = from_string(s);
  if (!v) throw BadRecord(std::string("unknown ") + key + " '" + s + "'");
  return *v;
}

std::optional<Dimension> optional_dimension(const json& j, const char* key) {
  const auto& v = at(j, key);
  if (v.is_null()) return std::nullopt;
  return named<Dimension>(j, key, dimension_from_string);
}

json dimension_json(const std::optional<Dimension>& d) {
  return d ? json(std::string(to_string(*d))) : json(nullptr);
}

// --- parameters and values -------------------------------------------------

json to_json(const Parameter& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Rational>) {
          return {{"num", v.to_string()}};
        } else if constexpr (std::is_same_v<T, std::string>) {
          return {{"text", v}};
        } else if constexpr (std::is_same_v<T, TextList>) {
          return {{"texts", v.items}};
        } else if constexpr (std::is_same_v<T, PropertyList>) {
          json items = json::array();
          for (auto prop : v.items) items.push_back(std::string(to_string(prop)));
          return {{"props", items}};
        } else {
          return {{"dim", std::string(to_string(v))}};
        }
      },
      p);
}

Rational rational(const json& j) {
  try {
    return Rational::parse(str(j, "num"));
  } catch (const Error& e) {
    throw BadRecord(e.what());
  }
}

Parameter parameter_from(const json& j) {
  if (!j.is_object() || j.size() != 1) throw BadRecord("a parameter is an object with exactly one key");
  if (j.contains("num")) return rational(j);
  if (j.contains("text")) return str(j, "text");
  if (j.contains("texts")) {
    TextList out;
    for (const auto& t : array(j, "texts")) {
      if (!t.is_string()) throw BadRecord("texts must hold strings");
      out.items.push_back(t.get<std::string>());
    }
    return out;
  }
  if (j.contains("props")) {
    PropertyList out;
    for (const auto& t : array(j, "props")) {
      auto p = t.is_string() ? property_from_string(t.get<std::string>()) : std::nullopt;
      if (!p) throw BadRecord("unknown property in props");
      out.items.push_back(*p);
    }
    return out;
  }
  if (j.contains("dim")) return named<Dimension>(j, "dim", dimension_from_string);
  throw BadRecord("unknown parameter kind '" + j.begin().key() + "'");
}

json to_json(const NodeValue& v) {
  if (const auto* r = std::get_if<Rational>(&v)) return {{"num", r->to_string()}};
  return {{"text", std::get<std::string>(v)}};
}

NodeValue node_value_from(const json& j) {
  if (j.is_object() && j.contains("num")) return rational(j);
  if (j.is_object() && j.contains("text")) return str(j, "text");
  throw BadRecord("a value is {\"num\": ...} or {\"text\": ...}");
}

std::vector<std::string> strings(const json& j, const char* key) {
  std::vector<std::string> out;
  for (const auto& t : array(j, key)) {
    if (!t.is_string()) throw BadRecord(std::string("field '") + key + "' must hold strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

// --- graphs ----------------------------------------------------------------

json to_json(const ErgNode& n) {
  json j = {{"id", n.id}, {"kind", std::string(to_string(n.kind()))}, {"description", n.description}};
  if (const auto* k = std::get_if<KnowledgePayload>(&n.payload)) {
    j["fact"] = k->fact_id;
  } else if (const auto* m = std::get_if<MathPayload>(&n.payload)) {
    j["op"] = std::string(to_string(m->op));
    json ops = json::array();
    for (const auto& o : m->operands) ops.push_back(o ? json(o->to_string()) : json(nullptr));
    j["operands"] = ops;
  } else {
    const auto& c = std::get<ConditionPayload>(n.payload);
    j["condition"] = std::string(to_string(c.condition));
    j["dimension"] = dimension_json(c.dimension);
    json params = json::array();
    for (const auto& p : c.parameters) params.push_back(p ? to_json(*p) : json(nullptr));
    j["parameters"] = params;
    j["terms"] = c.terms;
  }
  return j;
}

ErgNode node_from(const json& j) {
  ErgNode n;
  n.id = str(j, "id");
  n.description = str(j, "description");
  const auto kind = str(j, "kind");
  if (kind == to_string(NodeKind::knowledge)) {
    n.payload = KnowledgePayload{str(j, "fact")};
  } else if (kind == to_string(NodeKind::mathematical)) {
    MathPayload m;
    m.op = named<Operation>(j, "op", operation_from_string);
    for (const auto& o : array(j, "operands")) {
      if (o.is_null()) {
        m.operands.emplace_back();
      } else if (o.is_string()) {
        try {
          m.operands.emplace_back(Rational::parse(o.get<std::string>()));
        } catch (const Error& e) {
          throw BadRecord(e.what());
        }
      } else {
        throw BadRecord("operands hold rational strings or null");
      }
    }
    n.payload = std::move(m);
  } else if (kind == to_string(NodeKind::conditional)) {
    ConditionPayload c;
    c.condition = named<Condition>(j, "condition", condition_from_string);
    c.dimension = optional_dimension(j, "dimension");
    for (const auto& p : array(j, "parameters")) {
      c.parameters.push_back(p.is_null() ? std::optional<Parameter>{} : parameter_from(p));
    }
    c.terms = strings(j, "terms");
    n.payload = std::move(c);
  } else {
    throw BadRecord("unknown node kind '" + kind + "'");
  }
  return n;
}

json to_json(const Erg& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back(to_json(n));
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({e.parent, e.child});
  return {{"nodes", nodes}, {"edges", edges}};
}

Erg erg_from(const json& j) {
  Erg g;
  for (const auto& n : array(j, "nodes")) g.nodes.push_back(node_from(n));
  for (const auto& e : array(j, "edges")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      throw BadRecord("an edge is a [parent, child] pair");
    }
    g.edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
  }
  return g;
}

json to_json(const ResolvedCondition& rc) {
  json params = json::array();
  for (const auto& p : rc.parameters) params.push_back(to_json(p));
  json children = json::array();
  for (const auto& c : rc.children) children.push_back(to_json(c));
  return {{"node", rc.node_id},
          {"condition", std::string(to_string(rc.condition))},
          {"dimension", dimension_json(rc.dimension)},
          {"parameters", params},
          {"terms", rc.terms},
          {"children", children}};
}

ResolvedCondition resolved_from(const json& j) {
  ResolvedCondition rc;
  rc.node_id = str(j, "node");
  rc.condition = named<Condition>(j, "condition", condition_from_string);
  rc.dimension = optional_dimension(j, "dimension");
  for (const auto& p : array(j, "parameters")) rc.parameters.push_back(parameter_from(p));
  rc.terms = strings(j, "terms");
  for (const auto& c : array(j, "children")) rc.children.push_back(resolved_from(c));
  return rc;
}

// --- constraints, instructions, dialogues ---------------------------------

json to_json(const ConstraintItem& item) {
  json resolved = json::object();
  for (const auto& [id, v] : item.evaluated.resolved) resolved[id] = to_json(v);
  json sinks = json::array();
  for (const auto& s : item.evaluated.sinks) sinks.push_back(to_json(s));
  return {{"text", item.text},
          {"erg", to_json(item.evaluated.source)},
          {"mermaid", render_mermaid(item.evaluated.source)},
          {"resolved", resolved},
          {"sinks", sinks},
          {"dimension", std::string(to_string(item.evaluated.dimension))},
          {"rubric", item.evaluated.rubric},
          {"verifier_spec", export_verifier_spec(item.predicate)}};
}

ConstraintItem constraint_from(const json& j) {
  ConstraintItem item;
  item.text = str(j, "text");
  item.evaluated.source = erg_from(at(j, "erg"));
  const auto& resolved = at(j, "resolved");
  if (!resolved.is_object()) throw BadRecord("field 'resolved' must be an object");
  for (const auto& [id, v] : resolved.items()) item.evaluated.resolved[id] = node_value_from(v);
  for (const auto& s : array(j, "sinks")) item.evaluated.sinks.push_back(resolved_from(s));
  item.evaluated.dimension = named<Dimension>(j, "dimension", dimension_from_string);
  item.evaluated.rubric = str(j, "rubric");
  try {
    item.predicate = parse_verifier_spec(str(j, "verifier_spec"));
  } catch (const ParseError& e) {
    throw BadRecord(std::string("verifier_spec: ") + e.what());
  }
  return item;
}

json constraints_json(const std::vector<ConstraintItem>& items) {
  json out = json::array();
  for (const auto& c : items) out.push_back(to_json(c));
  return out;
}

std::vector<ConstraintItem> constraints_from(const json& j, const char* key) {
  std::vector<ConstraintItem> out;
  for (const auto& c : array(j, key)) out.push_back(constraint_from(c));
  return out;
}

json to_json(const Instruction& in) {
  return {{"query", in.query},
          {"rendered_prompt", in.rendered_prompt},
          {"difficulty", in.difficulty},
          {"constraints", constraints_json(in.constraints)}};
}

Instruction instruction_from(const json& j) {
  Instruction in;
  in.query = str(j, "query");
  in.rendered_prompt = str(j, "rendered_prompt");
  in.difficulty = static_cast<int>(integer(j, "difficulty"));
  in.constraints = constraints_from(j, "constraints");
  return in;
}

json to_json(const Dialogue& d) {
  json turns = json::array();
  for (const auto& t : d.turns) turns.push_back({{"role", t.role}, {"text", t.text}});
  json schedule = json::array();
  for (const auto& [turn, idx] : d.schedule) schedule.push_back({{"turn", turn}, {"constraints", idx}});
  return {{"turns", turns},
          {"constraints", constraints_json(d.constraints)},
          {"schedule", schedule},
          {"priority", std::string(to_string(d.priority))},
          {"adversarial", d.adversarial ? json(std::string(to_string(*d.adversarial))) : json(nullptr)},
          {"rubrics", d.rubrics}};
}

Dialogue dialogue_from(const json& j) {
  Dialogue d;
  for (const auto& t : array(j, "turns")) d.turns.push_back({str(t, "role"), str(t, "text")});
  d.constraints = constraints_from(j, "constraints");
  for (const auto& s : array(j, "schedule")) {
    std::vector<std::size_t> idx;
    for (const auto& i : array(s, "constraints")) {
      if (!i.is_number_unsigned() || i.get<std::size_t>() >= d.constraints.size()) {
        throw BadRecord("schedule refers to a missing constraint");
      }
      idx.push_back(i.get<std::size_t>());
    }
    d.schedule[unsigned_integer(s, "turn")] = std::move(idx);
  }
  d.priority = named<PriorityRule>(j, "priority", priority_from_string);
  if (!at(j, "adversarial").is_null()) d.adversarial = named<AdversarialCategory>(j, "adversarial", adversarial_from_string);
  d.rubrics = strings(j, "rubrics");
  return d;
}

json to_json(const Provenance& p) {
  return {{"seed", p.seed},
          {"record_seed", p.record_seed},
          {"bank_version", p.bank_version},
          {"template_version", p.template_version},
          {"rules_version", p.rules_version},
          {"generator_mode", p.generator_mode},
          {"generator_model", p.generator_model},
          {"judge_model", p.judge_model}};
}

Provenance provenance_from(const json& j) {
  Provenance p;
  p.seed = unsigned_integer(j, "seed");
  p.record_seed = unsigned_integer(j, "record_seed");
  p.bank_version = str(j, "bank_version");
  p.template_version = str(j, "template_version");
  p.rules_version = str(j, "rules_version");
  p.generator_mode = str(j, "generator_mode");
  p.generator_model = str(j, "generator_model");
  p.judge_model = str(j, "judge_model");
  return p;
}

std::optional<RecordKind> record_kind_from(std::string_view s) {
  if (s == "single_turn") return RecordKind::single_turn;
  if (s == "multi_turn") return RecordKind::multi_turn;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(RecordKind k) noexcept {
  return k == RecordKind::single_turn ? "single_turn" : "multi_turn";
}

const std::vector<ConstraintItem>& DatasetRecord::constraints() const {
  if (instruction) return instruction->constraints;
  if (dialogue) return dialogue->constraints;
  static const std::vector<ConstraintItem> none;
  return none;
}

std::vector<Predicate> DatasetRecord::predicates() const {
  std::vector<Predicate> out;
  for (const auto& c : constraints()) out.push_back(c.predicate);
  return out;
}

std::vector<std::string> DatasetRecord::rubrics() const {
  return dialogue ? dialogue->rubrics : std::vector<std::string>{};
}

std::string serialize_record(const DatasetRecord& r) {
  json cot = json::array();
  for (const auto& t : r.cot) cot.push_back({{"pattern", std::string(to_string(t.pattern))}, {"text", t.text}});
  json j = {{"format", std::string(kDatasetFormat)},
            {"id", r.id},
            {"kind", std::string(to_string(r.kind))},
            {"level", r.level},
            {"query", r.query},
            {"instruction", r.instruction ? to_json(*r.instruction) : json(nullptr)},
            {"dialogue", r.dialogue ? to_json(*r.dialogue) : json(nullptr)},
            {"canonical_response", r.canonical_response},
            {"mutated_response", {{"text", r.mutated_response}, {"broken", r.broken_constraint}}},
            {"cot", cot},
            {"provenance", to_json(r.provenance)}};
  return j.dump();
}

DatasetRecord parse_record(std::string_view text, std::size_t line) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw ParseError("not valid JSON", line);
  try {
    if (!j.is_object()) throw BadRecord("a record is a JSON object");
    if (str(j, "format") != kDatasetFormat) throw BadRecord("unsupported format '" + str(j, "format") + "'");
    DatasetRecord r;
    r.id = str(j, "id");
    r.kind = named<RecordKind>(j, "kind", record_kind_from);
    r.level = static_cast<int>(integer(j, "level"));
    if (!at(j, "instruction").is_null()) r.instruction = instruction_from(j["instruction"]);
    r.query = str(j, "query");
    if (!at(j, "dialogue").is_null()) r.dialogue = dialogue_from(j["dialogue"]);
    if (r.kind == RecordKind::single_turn && !r.instruction) throw BadRecord("single_turn record lacks instruction");
    if (r.kind == RecordKind::multi_turn && !r.dialogue) throw BadRecord("multi_turn record lacks dialogue");
    r.canonical_response = str(j, "canonical_response");
    const auto& mutated = at(j, "mutated_response");
    r.mutated_response = str(mutated, "text");
    r.broken_constraint = static_cast<std::size_t>(unsigned_integer(mutated, "broken"));
    for (const auto& t : array(j, "cot")) {
      r.cot.push_back({named<CotPattern>(t, "pattern", cot_pattern_from_string), str(t, "text")});
    }
    r.provenance = provenance_from(at(j, "provenance"));
    return r;
  } catch (const BadRecord& e) {
    throw ParseError(e.what(), line);
  } catch (const json::exception& e) {
    throw ParseError(e.what(), line);
  }
}

std::string serialize_dataset(std::span<const DatasetRecord> records) {
  std::string out;
  for (const auto& r : records) out += serialize_record(r) + "\n";
  return out;
}

std::vector<DatasetRecord> parse_dataset(std::string_view text) {
  std::vector<DatasetRecord> out;
  std::size_t line = 0;
  while (!text.empty()) {
    ++line;
    const auto nl = text.find('\n');
    auto row = text.substr(0, nl);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.find_first_not_of(" \t") != std::string_view::npos) out.push_back(parse_record(row, line));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

void write_dataset(std::span<const DatasetRecord> records, const std::filesystem::path& path) {
  write_text_file(path, serialize_dataset(records));
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ArgumentError("failed writing '" + path.string() + "'");
}

}  // namespace ergkit
