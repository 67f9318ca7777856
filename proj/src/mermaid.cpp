#include <cctype>
#include <set>

#include "ergkit/error.hpp"
#include "ergkit/graph.hpp"

namespace ergkit {
namespace {

bool is_id_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_header(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  line.remove_prefix(i);
  for (std::string_view kw : {"graph", "flowchart"}) {
    if (line.substr(0, kw.size()) == kw && (line.size() == kw.size() || std::isspace(static_cast<unsigned char>(line[kw.size()])))) {
      return true;
    }
  }
  return false;
}

class StatementParser {
 public:
  StatementParser(std::string_view text, std::size_t line, MermaidGraph& out, std::set<std::string>& seen)
      : text_(text), line_(line), out_(out), seen_(seen) {}

  void run() {
    skip_space();
    if (pos_ == text_.size()) return;  // empty statement
    std::string from = node();
    declare(from);
    skip_space();
    while (pos_ < text_.size()) {
      arrow();
      skip_space();
      std::string to = node();
      declare(to);
      out_.edges.push_back({from, to});
      from = std::move(to);
      skip_space();
    }
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string node() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_id_char(text_[pos_])) ++pos_;
    if (pos_ == start) {
      if (pos_ == text_.size()) throw ParseError("missing node after arrow", line_);
      throw ParseError("expected a node id at '" + std::string(text_.substr(pos_, 8)) + "'", line_);
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  void arrow() {
    if (text_.substr(pos_, 3) == "-->") {
      pos_ += 3;
    } else if (text_.substr(pos_, 2) == "->") {
      pos_ += 2;
    } else {
      std::size_t end = pos_;
      while (end < text_.size() && !is_id_char(text_[end]) && !std::isspace(static_cast<unsigned char>(text_[end]))) ++end;
      std::string_view bad = text_.substr(pos_, std::max<std::size_t>(end - pos_, 1));
      throw ParseError("malformed arrow '" + std::string(bad) + "'", line_);
    }
  }

  void declare(const std::string& id) {
    if (seen_.insert(id).second) out_.nodes.push_back(id);
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
  MermaidGraph& out_;
  std::set<std::string>& seen_;
};

}  // namespace

MermaidGraph parse_mermaid(std::string_view text) {
  MermaidGraph out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool first_content = true;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
    if (blank) continue;
    if (first_content && is_header(line)) {
      first_content = false;
      continue;
    }
    first_content = false;

    std::size_t s = 0;
    while (s <= line.size()) {
      std::size_t e = line.find_first_of(",;", s);
      if (e == std::string_view::npos) e = line.size();
      StatementParser(line.substr(s, e - s), line_no, out, seen).run();
      s = e + 1;
    }
  }
  return out;
}

std::string render_mermaid(const Erg& erg) {
  std::string out;
  std::set<std::string> used;
  for (const auto& e : erg.edges) {
    if (!out.empty()) out += ", ";
    out += e.parent + "-->" + e.child;
    used.insert(e.parent);
    used.insert(e.child);
  }
  for (const auto& n : erg.nodes) {
    if (used.count(n.id)) continue;
    if (!out.empty()) out += ", ";
    out += n.id;
  }
  return out;
}

}  // namespace ergkit
