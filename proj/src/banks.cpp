#include "ergkit/banks.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ergkit/error.hpp"
#include "ergkit/random.hpp"

namespace ergkit {
namespace assets {
extern const std::string_view default_banks;
}

namespace {

using json = nlohmann::json;

constexpr ParameterSlot kLimit[] = {{"limit", ValueKind::number}};
constexpr ParameterSlot kBounds[] = {{"lower", ValueKind::number}, {"upper", ValueKind::number}};
constexpr ParameterSlot kValue[] = {{"value", ValueKind::scalar}};
constexpr ParameterSlot kItems[] = {{"items", ValueKind::membership}};
constexpr ParameterSlot kDivisor[] = {{"divisor", ValueKind::number_or_dimension}};

constexpr std::array<ConditionKind, 14> kConditions = {{
    {Condition::no_more_than, "no_more_than", kLimit, false},
    {Condition::no_less_than, "no_less_than", kLimit, false},
    {Condition::interval, "interval", kBounds, false},
    {Condition::equal_to, "equal_to", kValue, false},
    {Condition::not_equal_to, "not_equal_to", kValue, false},
    {Condition::forbidden, "forbidden", kItems, false},
    {Condition::required, "required", kItems, false},
    {Condition::logical_and, "logical_and", {}, true},
    {Condition::logical_or, "logical_or", {}, true},
    {Condition::maximum_value, "maximum_value", kLimit, false},
    {Condition::minimum_value, "minimum_value", kLimit, false},
    {Condition::positive_integer_multiple_of, "positive_integer_multiple_of", kDivisor, false},
    {Condition::strictly_ascending_by_length, "strictly_ascending_by_length", {}, false},
    {Condition::consecutive_fibonacci_terms, "consecutive_fibonacci_terms", {}, false},
}};

constexpr std::array<OperationKind, 4> kOperations = {{
    {Operation::addition, "addition"},
    {Operation::subtraction, "subtraction"},
    {Operation::multiplication, "multiplication"},
    {Operation::division, "division"},
}};

constexpr std::array<DimensionKind, 21> kDimensions = {{
    {Dimension::paragraph_count, "paragraph_count", MeasurementKind::count},
    {Dimension::sentence_count, "sentence_count", MeasurementKind::count},
    {Dimension::sentence_type_mix, "sentence_type_mix", MeasurementKind::set},
    {Dimension::word_count, "word_count", MeasurementKind::count},
    {Dimension::character_count, "character_count", MeasurementKind::count},
    {Dimension::punctuation_count, "punctuation_count", MeasurementKind::count},
    {Dimension::bold_word_count, "bold_word_count", MeasurementKind::count},
    {Dimension::bold_word_set, "bold_word_set", MeasurementKind::set},
    {Dimension::unordered_list_item_count, "unordered_list_item_count", MeasurementKind::count},
    {Dimension::unordered_list_items, "unordered_list_items", MeasurementKind::set},
    {Dimension::keyword_count, "keyword_count", MeasurementKind::count},
    {Dimension::keyword_set, "keyword_set", MeasurementKind::set},
    {Dimension::language, "language", MeasurementKind::text},
    {Dimension::beginning_of_reply, "beginning_of_reply", MeasurementKind::text},
    {Dimension::ending_of_reply, "ending_of_reply", MeasurementKind::text},
    {Dimension::per_paragraph_sentence_counts, "per_paragraph_sentence_counts", MeasurementKind::sequence},
    {Dimension::numbered_list_item_count, "numbered_list_item_count", MeasurementKind::count},
    {Dimension::quotation_count, "quotation_count", MeasurementKind::count},
    {Dimension::bracketed_term_count, "bracketed_term_count", MeasurementKind::count},
    {Dimension::line_count, "line_count", MeasurementKind::count},
    {Dimension::special_symbol_count, "special_symbol_count", MeasurementKind::count},
}};

template <class Table, class Id>
const auto& find_in(const Table& table, Id id) {
  return table[static_cast<std::size_t>(id)];
}

template <class Table>
auto from_name(const Table& table, std::string_view name) -> std::optional<decltype(table[0].id)> {
  for (const auto& entry : table) {
    if (entry.name == name) return entry.id;
  }
  return std::nullopt;
}

template <class Enum, class Table>
std::vector<Enum> all_of(const Table& table) {
  std::vector<Enum> out;
  for (const auto& entry : table) out.push_back(entry.id);
  return out;
}

[[noreturn]] void schema_error(std::string_view source, std::size_t line, const std::string& what) {
  throw SchemaError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::span<const ConditionKind> condition_catalogue() noexcept { return kConditions; }
std::span<const OperationKind> operation_catalogue() noexcept { return kOperations; }
std::span<const DimensionKind> dimension_catalogue() noexcept { return kDimensions; }

const ConditionKind& kind_of(Condition c) noexcept { return find_in(kConditions, c); }
const OperationKind& kind_of(Operation o) noexcept { return find_in(kOperations, o); }
const DimensionKind& kind_of(Dimension d) noexcept { return find_in(kDimensions, d); }

std::string_view to_string(Condition c) noexcept { return kind_of(c).name; }
std::string_view to_string(Operation o) noexcept { return kind_of(o).name; }
std::string_view to_string(Dimension d) noexcept { return kind_of(d).name; }

std::string_view to_string(MeasurementKind k) noexcept {
  switch (k) {
    case MeasurementKind::count:
      return "count";
    case MeasurementKind::text:
      return "text";
    case MeasurementKind::set:
      return "set";
    case MeasurementKind::sequence:
      return "sequence";
  }
  return "unknown";
}

std::optional<Condition> condition_from_string(std::string_view name) noexcept { return from_name(kConditions, name); }
std::optional<Operation> operation_from_string(std::string_view name) noexcept { return from_name(kOperations, name); }
std::optional<Dimension> dimension_from_string(std::string_view name) noexcept { return from_name(kDimensions, name); }

std::string KnowledgeFact::answer_text() const {
  if (const auto* n = std::get_if<std::int64_t>(&answer)) return std::to_string(*n);
  return std::get<std::string>(answer);
}

Banks::Banks(std::string version, std::vector<KnowledgeFact> facts, std::vector<Condition> conditions,
             std::vector<Operation> operations, std::vector<Dimension> dimensions)
    : version_(std::move(version)),
      facts_(std::move(facts)),
      conditions_(std::move(conditions)),
      operations_(std::move(operations)),
      dimensions_(std::move(dimensions)) {
  std::set<std::string_view> seen;
  for (const auto& f : facts_) {
    if (!seen.insert(f.id).second) throw IntegrityError("duplicate fact id '" + f.id + "'");
  }
}

const KnowledgeFact* Banks::find_fact(std::string_view id) const noexcept {
  for (const auto& f : facts_) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

std::string_view default_banks_text() noexcept { return assets::default_banks; }

const Banks& default_banks() {
  static const Banks banks = parse_banks(assets::default_banks, "<embedded default>");
  return banks;
}

Banks parse_banks(std::string_view text, std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::string version;
  std::vector<KnowledgeFact> facts;
  std::vector<Condition> conditions;
  std::vector<Operation> operations;
  std::vector<Dimension> dimensions;
  std::set<std::string> fact_ids;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      schema_error(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) schema_error(source, line_no, "record is not an object");

    if (!header_seen) {
      if (record.value("format", "") != "ergkit-banks") {
        schema_error(source, line_no, "missing header record {\"format\": \"ergkit-banks\", ...}");
      }
      if (!record.contains("version") || record["version"] != 1) {
        schema_error(source, line_no, "unsupported bank format version");
      }
      version = record.value("bank_version", "unversioned");
      header_seen = true;
      continue;
    }

    if (!record.contains("kind") || !record["kind"].is_string() || !record.contains("id") ||
        !record["id"].is_string()) {
      schema_error(source, line_no, "record needs string fields 'kind' and 'id'");
    }
    const std::string kind = record["kind"];
    const std::string id = record["id"];
    const json payload = record.value("payload", json::object());
    if (!payload.is_object()) schema_error(source, line_no, "record '" + id + "': payload is not an object");

    if (kind == "fact") {
      if (id.empty()) schema_error(source, line_no, "fact with empty id");
      if (!payload.contains("question") || !payload["question"].is_string() ||
          payload["question"].get<std::string>().empty()) {
        schema_error(source, line_no, "fact '" + id + "': missing question");
      }
      if (!payload.contains("answer")) schema_error(source, line_no, "fact '" + id + "': missing answer");
      KnowledgeFact fact;
      fact.id = id;
      fact.question = payload["question"];
      fact.category = payload.value("category", "general");
      const json& answer = payload["answer"];
      if (answer.is_number_integer()) {
        fact.answer = answer.get<std::int64_t>();
      } else if (answer.is_string() && !answer.get<std::string>().empty()) {
        fact.answer = answer.get<std::string>();
      } else {
        schema_error(source, line_no, "fact '" + id + "': answer must be an integer or non-empty text");
      }
      if (!fact_ids.insert(id).second) {
        throw IntegrityError(std::string(source) + ":" + std::to_string(line_no) + ": duplicate fact id '" + id +
                             "'");
      }
      facts.push_back(std::move(fact));
    } else if (kind == "condition") {
      auto c = condition_from_string(id);
      if (!c) schema_error(source, line_no, "unknown condition '" + id + "'");
      if (std::find(conditions.begin(), conditions.end(), *c) == conditions.end()) conditions.push_back(*c);
    } else if (kind == "operation") {
      auto o = operation_from_string(id);
      if (!o) schema_error(source, line_no, "unknown operation '" + id + "'");
      if (std::find(operations.begin(), operations.end(), *o) == operations.end()) operations.push_back(*o);
    } else if (kind == "dimension") {
      auto d = dimension_from_string(id);
      if (!d) schema_error(source, line_no, "unknown dimension '" + id + "'");
      if (std::find(dimensions.begin(), dimensions.end(), *d) == dimensions.end()) dimensions.push_back(*d);
    } else {
      schema_error(source, line_no, "record '" + id + "': unknown kind '" + kind + "'");
    }
  }
  if (!header_seen) schema_error(source, line_no == 0 ? 1 : line_no, "empty bank file");

  if (conditions.empty()) conditions = all_of<Condition>(kConditions);
  if (operations.empty()) operations = all_of<Operation>(kOperations);
  if (dimensions.empty()) dimensions = all_of<Dimension>(kDimensions);
  return Banks(std::move(version), std::move(facts), std::move(conditions), std::move(operations),
               std::move(dimensions));
}

Banks load_banks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read bank file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_banks(buffer.str(), path.string());
}

const KnowledgeFact& lookup_fact(const Banks& banks, std::string_view id) {
  if (const auto* fact = banks.find_fact(id)) return *fact;
  throw NotFoundError("unknown knowledge fact '" + std::string(id) + "'");
}

namespace {

template <class T>
std::vector<T> draw(Rng& rng, std::span<const T> pool, std::size_t count, std::string_view what) {
  if (count > pool.size()) {
    throw CapacityError("requested " + std::to_string(count) + " " + std::string(what) + " but the bank holds " +
                        std::to_string(pool.size()));
  }
  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + rng.index(idx.size() - i);
    std::swap(idx[i], idx[j]);
    out.push_back(pool[idx[i]]);
  }
  return out;
}

}  // namespace

NodeSelection sample_nodes(const Banks& banks, const NodeCounts& counts, std::uint64_t seed) {
  NodeSelection selection;
  // One stream per pool so changing one count leaves the other draws intact.
  {
    Rng rng(mix_seed(seed, 1));
    std::vector<std::string> ids;
    for (const auto& f : banks.facts()) ids.push_back(f.id);
    selection.facts = draw<std::string>(rng, ids, counts.facts, "facts");
  }
  {
    Rng rng(mix_seed(seed, 2));
    selection.conditions = draw(rng, banks.conditions(), counts.conditions, "conditions");
  }
  {
    Rng rng(mix_seed(seed, 3));
    selection.operations = draw(rng, banks.operations(), counts.operations, "operations");
  }
  {
    Rng rng(mix_seed(seed, 4));
    selection.dimensions = draw(rng, banks.dimensions(), counts.dimensions, "dimensions");
  }
  return selection;
}

}  // namespace ergkit
