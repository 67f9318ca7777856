#include "ergkit/analysis.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "ergkit/utf8.hpp"

namespace ergkit {
namespace {

constexpr std::array<char32_t, 18> kPunctuation = {
    U'.', U',', U'!', U'?', U';', U':', U'—', U'(', U')', U'[', U']', U'"', U'\'', U'…',
    U'“', U'”', U'‘', U'’',
};

bool is_terminal(char32_t cp) {
  return cp == U'.' || cp == U'!' || cp == U'?' || cp == U'。' || cp == U'！' || cp == U'？';
}

bool is_wide_terminal(char32_t cp) { return cp == U'。' || cp == U'！' || cp == U'？'; }

bool is_closer(char32_t cp) {
  return cp == U'"' || cp == U'\'' || cp == U')' || cp == U']' || cp == U'”' || cp == U'’' || cp == U'*';
}

bool is_alnum_cp(char32_t cp) {
  if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) != 0;
  return !utf8::is_space(cp) && !is_punctuation(cp) && !is_special_symbol(cp);
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  std::size_t e = s.size();
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

struct ListLine {
  enum class Kind { none, bullet, numbered } kind = Kind::none;
  MarkerStyle marker = MarkerStyle::dash;
  std::size_t indent = 0;
  std::string_view item;
};

ListLine classify(std::string_view line) {
  ListLine out;
  std::size_t i = 0;
  std::size_t width = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
    width += line[i] == '\t' ? 4 : 1;
    ++i;
  }
  if (i >= line.size()) return out;
  auto rest_after = [&](std::size_t j) -> std::optional<std::string_view> {
    if (j >= line.size() || (line[j] != ' ' && line[j] != '\t')) return std::nullopt;
    std::string_view item = trim(line.substr(j));
    if (item.empty()) return std::nullopt;
    return item;
  };
  char c = line[i];
  if (c == '-' || c == '*' || c == '+') {
    if (auto item = rest_after(i + 1)) {
      out.kind = ListLine::Kind::bullet;
      out.marker = c == '-' ? MarkerStyle::dash : c == '*' ? MarkerStyle::asterisk : MarkerStyle::plus;
      out.indent = width;
      out.item = *item;
    }
    return out;
  }
  std::size_t j = i;
  while (j < line.size() && j - i < 9 && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
  if (j > i && j < line.size() && (line[j] == '.' || line[j] == ')')) {
    if (auto item = rest_after(j + 1)) {
      out.kind = ListLine::Kind::numbered;
      out.indent = width;
      out.item = *item;
    }
  }
  return out;
}

// Removes paired "**" markers; an unpaired trailing marker stays as text.
std::string strip_bold(std::string_view text) {
  std::vector<std::size_t> marks;
  for (std::size_t pos = text.find("**"); pos != std::string_view::npos; pos = text.find("**", pos + 2)) {
    marks.push_back(pos);
  }
  if (marks.size() % 2) marks.pop_back();
  std::string out;
  std::size_t from = 0;
  for (std::size_t m : marks) {
    out.append(text.substr(from, m - from));
    from = m + 2;
  }
  out.append(text.substr(from));
  return out;
}

std::vector<std::string> paragraph_bold(std::string_view text) {
  std::vector<std::string> spans;
  std::size_t pos = text.find("**");
  while (pos != std::string_view::npos) {
    std::size_t close = text.find("**", pos + 2);
    if (close == std::string_view::npos) break;
    std::string_view inner = trim(text.substr(pos + 2, close - pos - 2));
    if (!inner.empty()) spans.emplace_back(inner);
    pos = text.find("**", close + 2);
  }
  return spans;
}

// Paragraph blocks as raw (untrimmed) line groups.
std::vector<std::vector<std::string_view>> paragraph_lines(std::string_view text) {
  std::vector<std::vector<std::string_view>> blocks;
  std::vector<std::string_view> current;
  for (auto line : split_lines(text)) {
    if (is_blank(line)) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(line);
    }
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  return blocks;
}

std::string join_lines(const std::vector<std::string_view>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out.append(lines[i]);
  }
  return out;
}

SentenceType type_of(char32_t mark) {
  switch (mark) {
    case U'?':
    case U'？':
      return SentenceType::interrogative;
    case U'!':
    case U'！':
      return SentenceType::exclamatory;
    case U'.':
    case U'。':
      return SentenceType::declarative;
    default:
      return SentenceType::other;
  }
}

bool has_alnum(std::u32string_view s) { return std::any_of(s.begin(), s.end(), is_alnum_cp); }

void push_sentence(std::vector<SentenceRecord>& out, std::u32string_view seg, char32_t mark) {
  std::size_t b = 0;
  while (b < seg.size() && utf8::is_space(seg[b])) ++b;
  std::size_t e = seg.size();
  while (e > b && utf8::is_space(seg[e - 1])) --e;
  seg = seg.substr(b, e - b);
  if (!has_alnum(seg)) return;
  SentenceRecord rec;
  rec.text = utf8::encode(seg);
  if (mark) rec.terminal = utf8::encode(mark);
  rec.type = type_of(mark);
  out.push_back(std::move(rec));
}

// Segments one prose run (markup already removed).
void segment_run(std::string_view text, std::vector<SentenceRecord>& out) {
  const std::u32string cps = utf8::decode(text);
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_terminal(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    char32_t last = 0;
    bool wide = false;
    while (j < cps.size() && is_terminal(cps[j])) {
      last = cps[j];
      wide = wide || is_wide_terminal(cps[j]);
      ++j;
    }
    while (j < cps.size() && is_closer(cps[j])) ++j;
    if (j == cps.size() || utf8::is_space(cps[j]) || wide) {
      push_sentence(out, std::u32string_view(cps).substr(start, j - start), last);
      start = j;
    }
    i = j;
  }
  if (start < cps.size()) push_sentence(out, std::u32string_view(cps).substr(start), 0);
}

std::vector<SentenceRecord> paragraph_sentences(const std::vector<std::string_view>& lines) {
  std::vector<SentenceRecord> out;
  std::string prose;
  auto flush = [&] {
    segment_run(strip_bold(prose), out);
    prose.clear();
  };
  for (auto line : lines) {
    auto ll = classify(line);
    if (ll.kind != ListLine::Kind::none) {
      flush();
      segment_run(strip_bold(ll.item), out);
    } else {
      if (!prose.empty()) prose += ' ';
      prose.append(trim(line));
    }
  }
  flush();
  return out;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

}  // namespace

std::string_view to_string(SentenceType t) noexcept {
  switch (t) {
    case SentenceType::declarative:
      return "declarative";
    case SentenceType::interrogative:
      return "interrogative";
    case SentenceType::exclamatory:
      return "exclamatory";
    case SentenceType::other:
      return "other";
  }
  return "other";
}

std::span<const char32_t> punctuation_marks() noexcept { return kPunctuation; }

bool is_punctuation(char32_t cp) noexcept {
  return std::find(kPunctuation.begin(), kPunctuation.end(), cp) != kPunctuation.end();
}

bool is_special_symbol(char32_t cp) noexcept {
  static constexpr std::string_view ascii = "#$%&*+/<=>@\\^_`|~";
  if (cp < 0x80) return ascii.find(static_cast<char>(cp)) != std::string_view::npos;
  if (cp >= 0x2100 && cp <= 0x2BFF) return true;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return true;
  return false;
}

std::vector<std::string> ResponseMeasurements::unordered_list_items() const {
  std::vector<std::string> items;
  for (const auto& block : list_blocks) {
    if (!block.top_level) continue;
    items.insert(items.end(), block.items.begin(), block.items.end());
  }
  return items;
}

std::vector<std::string> ResponseMeasurements::sentence_types() const {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.emplace_back(to_string(s.type));
  return out;
}

std::int64_t ResponseMeasurements::keyword_occurrences(std::string_view term) const {
  auto it = keyword_counts.find(std::string(term));
  if (it != keyword_counts.end()) return it->second;
  return count_term(content, term);
}

std::vector<std::string> segment_paragraphs(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& lines : paragraph_lines(text)) out.emplace_back(trim(join_lines(lines)));
  return out;
}

std::vector<SentenceRecord> segment_sentences(std::string_view text) {
  std::vector<SentenceRecord> out;
  for (const auto& lines : paragraph_lines(text)) {
    auto s = paragraph_sentences(lines);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::vector<std::string> extract_bold_spans(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& p : segment_paragraphs(text)) {
    auto spans = paragraph_bold(p);
    out.insert(out.end(), spans.begin(), spans.end());
  }
  return out;
}

std::vector<ListBlock> extract_list_items(std::string_view text) {
  std::vector<ListBlock> blocks;
  std::optional<std::size_t> top;
  std::optional<std::size_t> nested;
  for (auto line : split_lines(text)) {
    auto ll = classify(line);
    if (ll.kind != ListLine::Kind::bullet) {
      top.reset();
      nested.reset();
      continue;
    }
    std::string item = strip_bold(ll.item);
    if (ll.indent >= 2) {
      if (!nested || blocks[*nested].marker != ll.marker) {
        blocks.push_back({ll.marker, {}, false});
        nested = blocks.size() - 1;
      }
      blocks[*nested].items.push_back(std::move(item));
      continue;
    }
    nested.reset();
    if (!top || blocks[*top].marker != ll.marker) {
      blocks.push_back({ll.marker, {}, true});
      top = blocks.size() - 1;
    }
    blocks[*top].items.push_back(std::move(item));
  }
  return blocks;
}

std::int64_t count_term(std::string_view text, std::string_view term) {
  const std::string needle = lower_ascii(trim(term));
  if (needle.empty()) return 0;
  const std::string hay = lower_ascii(text);
  std::int64_t n = 0;
  std::size_t pos = hay.find(needle);
  while (pos != std::string::npos) {
    bool left = pos == 0 || !word_byte(hay[pos - 1]) || !word_byte(needle.front());
    std::size_t end = pos + needle.size();
    bool right = end == hay.size() || !word_byte(hay[end]) || !word_byte(needle.back());
    if (left && right) {
      ++n;
      pos = hay.find(needle, end);
    } else {
      pos = hay.find(needle, pos + 1);
    }
  }
  return n;
}

std::string detect_language(std::string_view text) {
  std::size_t latin = 0, cyrillic = 0, cjk = 0, other = 0;
  for (char32_t cp : utf8::decode(text)) {
    if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z') || (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7)) {
      ++latin;
    } else if (cp >= 0x400 && cp <= 0x4FF) {
      ++cyrillic;
    } else if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x3040 && cp <= 0x30FF) ||
               (cp >= 0xAC00 && cp <= 0xD7AF)) {
      ++cjk;
    } else if ((cp >= 0x370 && cp <= 0x3FF) || (cp >= 0x590 && cp <= 0x6FF) || (cp >= 0x900 && cp <= 0x97F) ||
               (cp >= 0xE00 && cp <= 0xE7F)) {
      ++other;
    }
  }
  const std::size_t best = std::max({latin, cyrillic, cjk, other});
  if (best == 0 || other == best) return "unknown";
  if (latin == best) return "latin";
  if (cyrillic == best) return "cyrillic";
  return "cjk";
}

std::string content_text(std::string_view text) {
  std::string out;
  bool first_block = true;
  for (const auto& lines : paragraph_lines(text)) {
    if (!first_block) out += "\n\n";
    first_block = false;
    std::string block;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i) block += '\n';
      auto ll = classify(lines[i]);
      block.append(ll.kind == ListLine::Kind::none ? lines[i] : ll.item);
    }
    out += strip_bold(block);
  }
  return out;
}

ResponseMeasurements measure(std::string_view response, std::span<const std::string> keywords) {
  ResponseMeasurements m;
  const auto blocks = paragraph_lines(response);
  m.paragraph_count = blocks.size();
  for (const auto& lines : blocks) {
    auto sentences = paragraph_sentences(lines);
    m.per_paragraph_sentence_counts.push_back(static_cast<std::int64_t>(sentences.size()));
    m.sentences.insert(m.sentences.end(), sentences.begin(), sentences.end());
    auto bold = paragraph_bold(trim(join_lines(lines)));
    m.bold_spans.insert(m.bold_spans.end(), bold.begin(), bold.end());
    m.line_count += lines.size();
    for (auto line : lines) {
      if (classify(line).kind == ListLine::Kind::numbered) ++m.numbered_list_item_count;
    }
  }
  m.list_blocks = extract_list_items(response);
  m.content = content_text(response);

  const std::u32string cps = utf8::decode(m.content);
  std::size_t straight_quotes = 0, open_quotes = 0, close_quotes = 0;
  bool in_word = false;
  for (char32_t cp : cps) {
    const bool space = utf8::is_space(cp);
    if (!space && !in_word) ++m.word_count;
    in_word = !space;
    if (is_punctuation(cp)) ++m.punctuation_count;
    if (is_special_symbol(cp)) ++m.special_symbol_count;
    if (cp == U'"') ++straight_quotes;
    if (cp == U'“') ++open_quotes;
    if (cp == U'”') ++close_quotes;
  }
  m.quotation_count = straight_quotes / 2 + std::min(open_quotes, close_quotes);
  // Counted on the raw text: '*' is always markup, every other visible code
  // point counts. Appending text then never lowers the count, which would
  // happen if a late "**" could turn earlier characters into markup.
  for (char32_t cp : utf8::decode(response)) {
    if (!utf8::is_space(cp) && cp != U'*') ++m.character_count;
  }

  for (std::size_t pos = m.content.find('['); pos != std::string::npos; pos = m.content.find('[', pos + 1)) {
    std::size_t close = m.content.find_first_of("]\n[", pos + 1);
    if (close == std::string::npos || m.content[close] != ']') continue;
    std::string_view inner = trim(std::string_view(m.content).substr(pos + 1, close - pos - 1));
    if (!inner.empty()) m.bracketed_terms.emplace_back(inner);
    pos = close;
  }

  m.language = detect_language(m.content);
  const std::string_view body = trim(m.content);
  m.leading_text = utf8::prefix(body, kEdgeTextLength);
  m.trailing_text = utf8::suffix(body, kEdgeTextLength);
  for (const auto& k : keywords) m.keyword_counts[k] = count_term(m.content, k);
  return m;
}

}  // namespace ergkit
