#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ergkit {

/// Version of the segmentation and counting rules below. Exported verifier
/// specs carry it so that a reimplementation can tell which rules applied.
inline constexpr std::string_view kMeasurementRulesVersion = "ergkit-rules/1";

enum class SentenceType { declarative, interrogative, exclamatory, other };

std::string_view to_string(SentenceType t) noexcept;

struct SentenceRecord {
  std::string text;
  /// The final mark of the terminal run ("." "!" "?"), empty when unterminated.
  std::string terminal;
  SentenceType type = SentenceType::other;

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

enum class MarkerStyle { dash, asterisk, plus };

struct ListBlock {
  MarkerStyle marker = MarkerStyle::dash;
  std::vector<std::string> items;
  bool top_level = true;

  friend bool operator==(const ListBlock&, const ListBlock&) = default;
};

struct ResponseMeasurements {
  std::size_t paragraph_count = 0;
  std::vector<SentenceRecord> sentences;
  std::vector<std::int64_t> per_paragraph_sentence_counts;
  std::size_t punctuation_count = 0;
  std::size_t character_count = 0;
  std::size_t word_count = 0;
  std::vector<std::string> bold_spans;
  std::vector<ListBlock> list_blocks;
  std::size_t numbered_list_item_count = 0;
  std::size_t quotation_count = 0;
  std::vector<std::string> bracketed_terms;
  std::size_t line_count = 0;
  std::size_t special_symbol_count = 0;
  /// "latin", "cyrillic", "cjk" or "unknown".
  std::string language = "unknown";
  std::string leading_text;
  std::string trailing_text;
  /// Case-insensitive whole-word occurrence counts of the requested terms.
  std::map<std::string, std::int64_t> keyword_counts;
  /// Markup-free text used for on-demand keyword counting.
  std::string content;

  std::size_t sentence_count() const noexcept { return sentences.size(); }
  /// Items of all top-level unordered list blocks, in order.
  std::vector<std::string> unordered_list_items() const;
  std::vector<std::string> sentence_types() const;
  /// Occurrences of `term`, from keyword_counts when measured, otherwise
  /// counted in `content`.
  std::int64_t keyword_occurrences(std::string_view term) const;

  friend bool operator==(const ResponseMeasurements&, const ResponseMeasurements&) = default;
};

inline constexpr std::size_t kEdgeTextLength = 64;

/// Punctuation marks counted by punctuation_count (one code point each).
std::span<const char32_t> punctuation_marks() noexcept;
bool is_punctuation(char32_t cp) noexcept;
bool is_special_symbol(char32_t cp) noexcept;

ResponseMeasurements measure(std::string_view response, std::span<const std::string> keywords = {});

/// Blank-line separated blocks, trimmed, never empty.
std::vector<std::string> segment_paragraphs(std::string_view text);

/// Sentences of one text, paragraph by paragraph. List item lines form their
/// own segments; a trailing unterminated run becomes a sentence of type other.
std::vector<SentenceRecord> segment_sentences(std::string_view text);

/// Texts enclosed by paired "**" markers, per paragraph, duplicates kept.
std::vector<std::string> extract_bold_spans(std::string_view text);

std::vector<ListBlock> extract_list_items(std::string_view text);

/// Case-insensitive count of `term` delimited by non-alphanumerics.
std::int64_t count_term(std::string_view text, std::string_view term);

/// Script of the majority of letters, "unknown" when there are none or the
/// majority is outside Latin/Cyrillic/CJK.
std::string detect_language(std::string_view text);

/// The text with bold markers and list markers removed.
std::string content_text(std::string_view text);

}  // namespace ergkit
