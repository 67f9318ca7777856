#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ergkit {

// ---------------------------------------------------------------------------
// Closed catalogues
// ---------------------------------------------------------------------------

enum class Condition {
  no_more_than,
  no_less_than,
  interval,
  equal_to,
  not_equal_to,
  forbidden,
  required,
  logical_and,
  logical_or,
  maximum_value,
  minimum_value,
  positive_integer_multiple_of,
  strictly_ascending_by_length,
  consecutive_fibonacci_terms,
};

enum class Operation { addition, subtraction, multiplication, division };

enum class Dimension {
  paragraph_count,
  sentence_count,
  sentence_type_mix,
  word_count,
  character_count,
  punctuation_count,
  bold_word_count,
  bold_word_set,
  unordered_list_item_count,
  unordered_list_items,
  keyword_count,
  keyword_set,
  language,
  beginning_of_reply,
  ending_of_reply,
  per_paragraph_sentence_counts,
  numbered_list_item_count,
  quotation_count,
  bracketed_term_count,
  line_count,
  special_symbol_count,
};

/// What a dimension measures: a single count, a text value, a collection of
/// texts (duplicates preserved) or a sequence of counts.
enum class MeasurementKind { count, text, set, sequence };

/// Value kinds a condition parameter slot accepts.
///  - number:              a rational literal
///  - scalar:              a number for count dimensions, a text for text dimensions
///  - membership:          a text list, or a property list (numeric properties
///                         for counts, `distinct` for collections)
///  - number_or_dimension: a rational literal or a reference to a count dimension
enum class ValueKind { number, scalar, membership, number_or_dimension };

struct ParameterSlot {
  std::string_view name;
  ValueKind kind;
};

struct ConditionKind {
  Condition id;
  std::string_view name;
  std::span<const ParameterSlot> parameters;
  bool combinator;

  std::size_t arity() const noexcept { return parameters.size(); }
};

struct OperationKind {
  Operation id;
  std::string_view name;
};

struct DimensionKind {
  Dimension id;
  std::string_view name;
  MeasurementKind measurement;
};

std::span<const ConditionKind> condition_catalogue() noexcept;
std::span<const OperationKind> operation_catalogue() noexcept;
std::span<const DimensionKind> dimension_catalogue() noexcept;

const ConditionKind& kind_of(Condition c) noexcept;
const OperationKind& kind_of(Operation o) noexcept;
const DimensionKind& kind_of(Dimension d) noexcept;

std::string_view to_string(Condition c) noexcept;
std::string_view to_string(Operation o) noexcept;
std::string_view to_string(Dimension d) noexcept;
std::string_view to_string(MeasurementKind k) noexcept;

std::optional<Condition> condition_from_string(std::string_view name) noexcept;
std::optional<Operation> operation_from_string(std::string_view name) noexcept;
std::optional<Dimension> dimension_from_string(std::string_view name) noexcept;

inline MeasurementKind measurement_of(Dimension d) noexcept { return kind_of(d).measurement; }

// ---------------------------------------------------------------------------
// Knowledge facts and the bank container
// ---------------------------------------------------------------------------

using FactAnswer = std::variant<std::int64_t, std::string>;

struct KnowledgeFact {
  std::string id;
  std::string question;
  FactAnswer answer;
  std::string category;

  bool is_numeric() const noexcept { return std::holds_alternative<std::int64_t>(answer); }
  /// Decimal text for integer answers, the text itself otherwise.
  std::string answer_text() const;

  friend bool operator==(const KnowledgeFact&, const KnowledgeFact&) = default;
};

/// Immutable after load. Conditions/operations/dimensions default to the full
/// closed catalogues; a bank file may restrict the sampling pool to a subset.
class Banks {
 public:
  Banks(std::string version, std::vector<KnowledgeFact> facts, std::vector<Condition> conditions,
        std::vector<Operation> operations, std::vector<Dimension> dimensions);

  const std::string& version() const noexcept { return version_; }
  std::span<const KnowledgeFact> facts() const noexcept { return facts_; }
  std::span<const Condition> conditions() const noexcept { return conditions_; }
  std::span<const Operation> operations() const noexcept { return operations_; }
  std::span<const Dimension> dimensions() const noexcept { return dimensions_; }

  const KnowledgeFact* find_fact(std::string_view id) const noexcept;

 private:
  std::string version_;
  std::vector<KnowledgeFact> facts_;
  std::vector<Condition> conditions_;
  std::vector<Operation> operations_;
  std::vector<Dimension> dimensions_;
};

/// The bank compiled into the library (line-delimited record text).
std::string_view default_banks_text() noexcept;
const Banks& default_banks();

/// Parses bank-file text. `source` names the input in error messages.
/// Throws SchemaError (naming the offending line) or IntegrityError.
Banks parse_banks(std::string_view text, std::string_view source = "<memory>");
Banks load_banks(const std::filesystem::path& path);

/// Throws NotFoundError for unknown ids.
const KnowledgeFact& lookup_fact(const Banks& banks, std::string_view id);

struct NodeCounts {
  std::size_t facts = 0;
  std::size_t conditions = 0;
  std::size_t operations = 0;
  std::size_t dimensions = 0;
};

struct NodeSelection {
  std::vector<std::string> facts;
  std::vector<Condition> conditions;
  std::vector<Operation> operations;
  std::vector<Dimension> dimensions;

  friend bool operator==(const NodeSelection&, const NodeSelection&) = default;
};

/// Draws without replacement from each pool; identical (banks, counts, seed)
/// always yield the identical selection. Throws CapacityError when a count
/// exceeds its pool.
NodeSelection sample_nodes(const Banks& banks, const NodeCounts& counts, std::uint64_t seed);

}  // namespace ergkit
