#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergkit/synthesis.hpp"

namespace ergkit {

/// Every record line carries this in its "format" field.
inline constexpr std::string_view kDatasetFormat = "ergkit-dataset/1";

enum class RecordKind { single_turn, multi_turn };
std::string_view to_string(RecordKind k) noexcept;

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t record_seed = 0;
  std::string bank_version;
  std::string template_version;
  std::string rules_version;
  std::string generator_mode;
  std::string generator_model;
  std::string judge_model;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct DatasetRecord {
  RecordKind kind = RecordKind::single_turn;
  std::string id;
  int level = 0;
  std::string query;
  /// Set for single_turn records.
  std::optional<Instruction> instruction;
  /// Set for multi_turn records; ends on the user turn being answered.
  std::optional<Dialogue> dialogue;
  std::string canonical_response;
  std::string mutated_response;
  /// Index (into constraints()) of the one constraint the mutated response breaks.
  std::size_t broken_constraint = 0;
  std::vector<CotTrace> cot;
  Provenance provenance;

  /// Constraints the final response is graded against.
  const std::vector<ConstraintItem>& constraints() const;
  std::vector<Predicate> predicates() const;
  /// Rubrics judged on top of the constraints (adversarial dialogues only).
  std::vector<std::string> rubrics() const;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// One line of JSON, no trailing newline.
std::string serialize_record(const DatasetRecord& record);
/// Throws ParseError carrying `line`.
DatasetRecord parse_record(std::string_view text, std::size_t line = 1);

std::string serialize_dataset(std::span<const DatasetRecord> records);
/// Blank lines are skipped; an empty text is an empty dataset.
std::vector<DatasetRecord> parse_dataset(std::string_view text);

void write_dataset(std::span<const DatasetRecord> records, const std::filesystem::path& path);
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

/// Reads whole files; throws NotFoundError when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace ergkit
