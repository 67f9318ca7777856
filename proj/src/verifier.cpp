#include "ergkit/verifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ergkit/error.hpp"
#include "ergkit/utf8.hpp"

namespace ergkit {
namespace {

using json = nlohmann::json;

[[noreturn]] void reject(const Predicate& p, const std::string& why) {
  std::string pair = std::string(to_string(p.condition));
  pair += " over ";
  pair += p.dimension ? std::string(to_string(*p.dimension)) : std::string("<no dimension>");
  throw CompileError("unsupported pairing " + pair + ": " + why);
}

template <class T>
const T* param(const Predicate& p, std::size_t i) {
  return i < p.parameters.size() ? std::get_if<T>(&p.parameters[i]) : nullptr;
}

bool ascending_allowed(Dimension d) { return d == Dimension::bold_word_set || d == Dimension::unordered_list_items; }

void check_leaf(const Predicate& p) {
  if (!p.dimension) reject(p, "a condition needs a dimension");
  if (!p.children.empty()) reject(p, "only combinators take children");
  const auto& kind = kind_of(p.condition);
  if (p.parameters.size() != kind.arity()) {
    reject(p, "expected " + std::to_string(kind.arity()) + " parameters, got " + std::to_string(p.parameters.size()));
  }
  const Dimension d = *p.dimension;
  if (!p.terms.empty() && d != Dimension::keyword_count) reject(p, "terms only apply to keyword_count");
  if (d == Dimension::keyword_count && p.terms.empty()) reject(p, "keyword_count needs at least one term");

  auto need_number = [&](std::size_t i) {
    if (!param<Rational>(p, i)) reject(p, "parameter " + std::string(kind.parameters[i].name) + " must be a number");
  };
  auto property_list = [&](bool numeric_ok, bool distinct_ok) {
    const auto* props = param<PropertyList>(p, 0);
    if (!props || props->items.empty()) return false;
    for (auto prop : props->items) {
      bool ok = prop == Property::distinct ? distinct_ok : numeric_ok;
      if (!ok) reject(p, "property '" + std::string(to_string(prop)) + "' does not apply");
    }
    return true;
  };
  auto text_list = [&] {
    const auto* texts = param<TextList>(p, 0);
    return texts && !texts->items.empty();
  };

  switch (measurement_of(d)) {
    case MeasurementKind::count:
      switch (p.condition) {
        case Condition::no_more_than:
        case Condition::no_less_than:
        case Condition::maximum_value:
        case Condition::minimum_value:
        case Condition::equal_to:
        case Condition::not_equal_to:
          need_number(0);
          return;
        case Condition::interval:
          need_number(0);
          need_number(1);
          return;
        case Condition::required:
        case Condition::forbidden:
          if (!property_list(true, false)) reject(p, "counts take a non-empty numeric property list");
          return;
        case Condition::positive_integer_multiple_of:
          if (const auto* r = param<Rational>(p, 0)) {
            if (!r->is_integer()) reject(p, "divisor " + r->to_string() + " is not an integer");
            return;
          }
          if (const auto* dim = param<Dimension>(p, 0)) {
            if (measurement_of(*dim) != MeasurementKind::count) reject(p, "divisor dimension must be a count");
            if (*dim == Dimension::keyword_count) reject(p, "divisor dimension cannot be keyword_count");
            return;
          }
          reject(p, "divisor must be an integer or a count dimension");
        default:
          reject(p, "not defined for counts");
      }
    case MeasurementKind::sequence:
      switch (p.condition) {
        case Condition::maximum_value:
        case Condition::minimum_value:
          need_number(0);
          return;
        case Condition::consecutive_fibonacci_terms:
          return;
        case Condition::required:
        case Condition::forbidden:
          if (!property_list(true, true)) reject(p, "sequences take a non-empty property list");
          return;
        default:
          reject(p, "not defined for sequences");
      }
    case MeasurementKind::set:
      switch (p.condition) {
        case Condition::required:
        case Condition::forbidden:
          if (text_list()) return;
          if (d != Dimension::keyword_set && property_list(false, true)) return;
          reject(p, "collections take a non-empty text list or {distinct}");
        case Condition::strictly_ascending_by_length:
          if (!ascending_allowed(d)) reject(p, "ordering by length needs an ordered text collection");
          return;
        default:
          reject(p, "not defined for collections");
      }
    case MeasurementKind::text:
      switch (p.condition) {
        case Condition::equal_to:
        case Condition::not_equal_to:
          if (!param<std::string>(p, 0)) reject(p, "text dimensions compare against text");
          return;
        case Condition::required:
        case Condition::forbidden:
          if (!text_list()) reject(p, "text dimensions take a non-empty text list");
          return;
        default:
          reject(p, "not defined for text");
      }
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

bool begins_with(std::string_view text, std::string_view term) {
  const std::string t = lower(text), w = lower(term);
  if (w.empty() || t.compare(0, w.size(), w) != 0) return false;
  return t.size() == w.size() || !word_byte(t[w.size()]) || !word_byte(w.back());
}

std::string strip_tail(std::string_view text) {
  std::u32string cps = utf8::decode(text);
  auto drop = [](char32_t c) {
    return utf8::is_space(c) || c == U'.' || c == U'!' || c == U'?' || c == U'…' || c == U'。' || c == U'！' ||
           c == U'？' || c == U'"' || c == U'\'' || c == U'”' || c == U'’' || c == U')' || c == U']' || c == U'*';
  };
  while (!cps.empty() && drop(cps.back())) cps.pop_back();
  return utf8::encode(cps);
}

bool ends_with(std::string_view text, std::string_view term) {
  const std::string t = lower(strip_tail(text)), w = lower(strip_tail(term));
  if (w.empty() || t.size() < w.size() || t.compare(t.size() - w.size(), w.size(), w) != 0) return false;
  const std::size_t at = t.size() - w.size();
  return at == 0 || !word_byte(t[at - 1]) || !word_byte(w.front());
}

bool text_matches(Dimension d, const ResponseMeasurements& m, std::string_view value) {
  switch (d) {
    case Dimension::language:
      return lower(m.language) == lower(value);
    case Dimension::beginning_of_reply:
      return begins_with(m.leading_text, value);
    case Dimension::ending_of_reply:
      return ends_with(m.trailing_text, value);
    default:
      return false;
  }
}

Rational count_value(Dimension d, const ResponseMeasurements& m, const Predicate* p = nullptr) {
  auto n = [](std::size_t v) { return Rational(static_cast<std::int64_t>(v)); };
  switch (d) {
    case Dimension::paragraph_count:
      return n(m.paragraph_count);
    case Dimension::sentence_count:
      return n(m.sentence_count());
    case Dimension::word_count:
      return n(m.word_count);
    case Dimension::character_count:
      return n(m.character_count);
    case Dimension::punctuation_count:
      return n(m.punctuation_count);
    case Dimension::bold_word_count:
      return n(m.bold_spans.size());
    case Dimension::unordered_list_item_count:
      return n(m.unordered_list_items().size());
    case Dimension::keyword_count: {
      std::int64_t total = 0;
      if (p) {
        for (const auto& t : p->terms) total += m.keyword_occurrences(t);
      }
      return Rational(total);
    }
    case Dimension::numbered_list_item_count:
      return n(m.numbered_list_item_count);
    case Dimension::quotation_count:
      return n(m.quotation_count);
    case Dimension::bracketed_term_count:
      return n(m.bracketed_terms.size());
    case Dimension::line_count:
      return n(m.line_count);
    case Dimension::special_symbol_count:
      return n(m.special_symbol_count);
    default:
      return Rational(0);
  }
}

std::vector<std::string> set_value(Dimension d, const ResponseMeasurements& m) {
  switch (d) {
    case Dimension::sentence_type_mix:
      return m.sentence_types();
    case Dimension::bold_word_set:
      return m.bold_spans;
    case Dimension::unordered_list_items:
      return m.unordered_list_items();
    default:
      return {};
  }
}

bool contains_item(Dimension d, const ResponseMeasurements& m, const std::vector<std::string>& values,
                   const std::string& item) {
  if (d == Dimension::keyword_set) return m.keyword_occurrences(item) > 0;
  return std::find(values.begin(), values.end(), item) != values.end();
}

std::size_t duplicates(const std::vector<std::string>& values) {
  std::set<std::string> seen(values.begin(), values.end());
  return values.size() - seen.size();
}

template <class T>
std::size_t duplicates_of(const std::vector<T>& values) {
  std::set<T> seen(values.begin(), values.end());
  return values.size() - seen.size();
}

std::size_t ascending_breaks(const std::vector<std::string>& values) {
  std::size_t breaks = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (utf8::length(values[i]) <= utf8::length(values[i - 1])) ++breaks;
  }
  return breaks;
}

// Distance of a sequence to the nearest run of consecutive Fibonacci terms
// F(k), F(k+1), ... with F(0) = 0, F(1) = 1.
double fibonacci_gap(const std::vector<std::int64_t>& seq) {
  if (seq.empty()) return 1;
  std::vector<std::int64_t> fib = {0, 1};
  const std::int64_t top = *std::max_element(seq.begin(), seq.end());
  while (fib.size() < seq.size() + 2 || fib[fib.size() - seq.size()] <= std::max<std::int64_t>(top, 1) * 2 + 2) {
    if (fib.back() > std::numeric_limits<std::int64_t>::max() / 2) break;
    fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + seq.size() <= fib.size(); ++k) {
    double gap = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) gap += std::fabs(static_cast<double>(seq[i] - fib[k + i]));
    best = std::min(best, gap);
  }
  return best;
}

double distance_to_interval(const Rational& x, const Rational& lo, const Rational& hi) {
  if (hi < lo) return 1 + std::fabs((x - lo).to_double());
  if (x < lo) return std::ceil((lo - x).to_double());
  if (hi < x) return std::ceil((x - hi).to_double());
  return 0;
}

double count_distance(const Predicate& p, const Rational& x, const ResponseMeasurements& m) {
  const Rational inf_lo(std::numeric_limits<std::int64_t>::min() / 4);
  const Rational inf_hi(std::numeric_limits<std::int64_t>::max() / 4);
  switch (p.condition) {
    case Condition::no_more_than:
    case Condition::maximum_value:
      return distance_to_interval(x, inf_lo, *param<Rational>(p, 0));
    case Condition::no_less_than:
    case Condition::minimum_value:
      return distance_to_interval(x, *param<Rational>(p, 0), inf_hi);
    case Condition::interval:
      return distance_to_interval(x, *param<Rational>(p, 0), *param<Rational>(p, 1));
    case Condition::equal_to: {
      const Rational v = *param<Rational>(p, 0);
      if (!v.is_integer()) return 1 + std::fabs((x - v).to_double());
      return std::fabs((x - v).to_double());
    }
    case Condition::not_equal_to:
      return x == *param<Rational>(p, 0) ? 1 : 0;
    case Condition::required: {
      double miss = 0;
      for (auto prop : param<PropertyList>(p, 0)->items) miss += has_property(x, prop) ? 0 : 1;
      return miss;
    }
    case Condition::forbidden: {
      double hit = 0;
      for (auto prop : param<PropertyList>(p, 0)->items) hit += has_property(x, prop) ? 1 : 0;
      return hit;
    }
    case Condition::positive_integer_multiple_of: {
      Rational d = param<Rational>(p, 0) ? *param<Rational>(p, 0) : count_value(*param<Dimension>(p, 0), m);
      if (!d.is_integer() || d.num() <= 0 || !x.is_integer()) return 1;
      const std::int64_t xv = x.num(), dv = d.num();
      if (xv <= 0) return static_cast<double>(dv - xv);
      const std::int64_t r = xv % dv;
      return static_cast<double>(std::min(r, dv - r));
    }
    default:
      return 0;
  }
}

}  // namespace

void check_predicate(const Predicate& p) {
  if (p.combinator()) {
    if (p.dimension || !p.parameters.empty() || !p.terms.empty()) {
      reject(p, "combinators take no dimension, parameters or terms");
    }
    if (p.children.empty()) reject(p, "combinator without children");
    for (const auto& c : p.children) check_predicate(c);
    return;
  }
  check_leaf(p);
}

Predicate compile_condition(const ResolvedCondition& rc) {
  Predicate p;
  p.condition = rc.condition;
  p.dimension = rc.dimension;
  p.parameters = rc.parameters;
  p.terms = rc.terms;
  for (const auto& c : rc.children) p.children.push_back(compile_condition(c));
  check_predicate(p);
  return p;
}

Predicate compile_constraint(const EvaluatedConstraint& ec) {
  if (ec.sinks.empty()) throw CompileError("evaluated constraint has no sink condition");
  if (ec.sinks.size() == 1) return compile_condition(ec.sinks.front());
  Predicate all;
  all.condition = Condition::logical_and;
  for (const auto& s : ec.sinks) all.children.push_back(compile_condition(s));
  return all;
}

double violation_distance(const Predicate& p, const ResponseMeasurements& m) {
  if (p.condition == Condition::logical_and) {
    double sum = 0;
    for (const auto& c : p.children) sum += violation_distance(c, m);
    return sum;
  }
  if (p.condition == Condition::logical_or) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : p.children) best = std::min(best, violation_distance(c, m));
    return p.children.empty() ? 1 : best;
  }
  const Dimension d = *p.dimension;
  switch (measurement_of(d)) {
    case MeasurementKind::count:
      return count_distance(p, count_value(d, m, &p), m);
    case MeasurementKind::sequence: {
      const auto& seq = m.per_paragraph_sentence_counts;
      switch (p.condition) {
        case Condition::maximum_value: {
          double over = 0;
          for (auto v : seq) over += std::max(0.0, std::ceil((Rational(v) - *param<Rational>(p, 0)).to_double()));
          return over;
        }
        case Condition::minimum_value: {
          double under = 0;
          for (auto v : seq) under += std::max(0.0, std::ceil((*param<Rational>(p, 0) - Rational(v)).to_double()));
          return under;
        }
        case Condition::consecutive_fibonacci_terms:
          return fibonacci_gap(seq);
        case Condition::required:
        case Condition::forbidden: {
          const bool want = p.condition == Condition::required;
          double miss = 0;
          for (auto prop : param<PropertyList>(p, 0)->items) {
            if (prop == Property::distinct) {
              const bool distinct = duplicates_of(seq) == 0;
              if (want != distinct) miss += want ? static_cast<double>(duplicates_of(seq)) : 1;
              continue;
            }
            for (auto v : seq) {
              if (has_property(Rational(v), prop) != want) miss += 1;
            }
          }
          return miss;
        }
        default:
          return 0;
      }
    }
    case MeasurementKind::set: {
      const auto values = set_value(d, m);
      switch (p.condition) {
        case Condition::required:
        case Condition::forbidden: {
          const bool want = p.condition == Condition::required;
          if (const auto* texts = param<TextList>(p, 0)) {
            double miss = 0;
            for (const auto& item : texts->items) miss += contains_item(d, m, values, item) == want ? 0 : 1;
            return miss;
          }
          const std::size_t dup = duplicates(values);
          if (want) return static_cast<double>(dup);
          return dup == 0 ? 1 : 0;
        }
        case Condition::strictly_ascending_by_length:
          return static_cast<double>(ascending_breaks(values));
        default:
          return 0;
      }
    }
    case MeasurementKind::text: {
      switch (p.condition) {
        case Condition::equal_to:
          return text_matches(d, m, *param<std::string>(p, 0)) ? 0 : 1;
        case Condition::not_equal_to:
          return text_matches(d, m, *param<std::string>(p, 0)) ? 1 : 0;
        case Condition::required: {
          // Text dimensions hold one value: it must match one of the items.
          for (const auto& item : param<TextList>(p, 0)->items) {
            if (text_matches(d, m, item)) return 0;
          }
          return 1;
        }
        case Condition::forbidden: {
          double hit = 0;
          for (const auto& item : param<TextList>(p, 0)->items) hit += text_matches(d, m, item) ? 1 : 0;
          return hit;
        }
        default:
          return 0;
      }
    }
  }
  return 0;
}

bool verify(const Predicate& p, const ResponseMeasurements& m) {
  if (p.condition == Condition::logical_and) {
    return std::all_of(p.children.begin(), p.children.end(), [&](const Predicate& c) { return verify(c, m); });
  }
  if (p.condition == Condition::logical_or) {
    return std::any_of(p.children.begin(), p.children.end(), [&](const Predicate& c) { return verify(c, m); });
  }
  return violation_distance(p, m) == 0;
}

std::string observe(const Predicate& p, const ResponseMeasurements& m) {
  if (p.combinator()) {
    std::set<std::string> seen;
    std::string out;
    for (const auto& c : p.children) {
      std::string o = observe(c, m);
      if (!seen.insert(o).second) continue;
      if (!out.empty()) out += "; ";
      out += o;
    }
    return out;
  }
  const Dimension d = *p.dimension;
  std::string out = std::string(to_string(d)) + "=";
  switch (measurement_of(d)) {
    case MeasurementKind::count:
      out += count_value(d, m, &p).to_string();
      if (const auto* dim = param<Dimension>(p, 0)) {
        out += "; " + std::string(to_string(*dim)) + "=" + count_value(*dim, m).to_string();
      }
      break;
    case MeasurementKind::sequence: {
      json arr = m.per_paragraph_sentence_counts;
      out += arr.dump();
      break;
    }
    case MeasurementKind::set: {
      json arr = set_value(d, m);
      if (d == Dimension::keyword_set) {
        arr = json::object();
        if (const auto* texts = param<TextList>(p, 0)) {
          for (const auto& t : texts->items) arr[t] = m.keyword_occurrences(t);
        }
      }
      out += arr.dump();
      break;
    }
    case MeasurementKind::text: {
      std::string v = d == Dimension::language ? m.language
                      : d == Dimension::beginning_of_reply ? utf8::prefix(m.leading_text, 24)
                                                           : utf8::suffix(m.trailing_text, 24);
      out += json(v).dump();
      break;
    }
  }
  return out;
}

std::string describe(const Predicate& p) {
  if (p.combinator()) {
    std::string out = p.condition == Condition::logical_and ? "all of (" : "any of (";
    for (std::size_t i = 0; i < p.children.size(); ++i) {
      if (i) out += "; ";
      out += describe(p.children[i]);
    }
    return out + ")";
  }
  std::string out = std::string(to_string(*p.dimension));
  if (!p.terms.empty()) out += describe(Parameter(TextList{p.terms}));
  out += " " + std::string(to_string(p.condition));
  if (p.condition == Condition::interval) {
    return out.substr(0, out.size() - 9) + " in [" + describe(p.parameters[0]) + ", " + describe(p.parameters[1]) + "]";
  }
  for (const auto& param : p.parameters) out += " " + describe(param);
  return out;
}

std::vector<std::string> keyword_vocabulary(std::span<const Predicate> predicates) {
  std::vector<std::string> out;
  auto add = [&](const std::string& t) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  };
  std::vector<const Predicate*> stack;
  for (const auto& p : predicates) stack.push_back(&p);
  // Depth-first in declaration order.
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    const Predicate* p = stack.back();
    stack.pop_back();
    for (const auto& t : p->terms) add(t);
    if (p->dimension == Dimension::keyword_set) {
      if (const auto* texts = param<TextList>(*p, 0)) {
        for (const auto& t : texts->items) add(t);
      }
    }
    for (auto it = p->children.rbegin(); it != p->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

VerificationReport make_report(std::vector<bool> constraint_verdicts, std::vector<bool> rubric_verdicts, int level) {
  VerificationReport r;
  r.constraint_verdicts = std::move(constraint_verdicts);
  r.rubric_verdicts = std::move(rubric_verdicts);
  r.total_constraints = r.constraint_verdicts.size();
  r.total_rubrics = r.rubric_verdicts.size();
  r.satisfied_count = static_cast<std::size_t>(std::count(r.constraint_verdicts.begin(), r.constraint_verdicts.end(), true));
  r.level = level;
  return r;
}

VerificationReport verify_instruction(std::span<const Predicate> predicates, std::string_view response,
                                      const std::vector<bool>& rubric_verdicts, int level) {
  const auto vocabulary = keyword_vocabulary(predicates);
  const auto m = measure(response, vocabulary);
  std::vector<bool> verdicts;
  std::vector<std::string> observations;
  for (const auto& p : predicates) {
    verdicts.push_back(verify(p, m));
    observations.push_back(observe(p, m));
  }
  auto report = make_report(std::move(verdicts), rubric_verdicts, level);
  report.observations = std::move(observations);
  return report;
}

// ---------------------------------------------------------------------------
// Spec document
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kRules[] = {
    "paragraphs: blocks separated by blank lines",
    "sentences: split after runs of . ! ? followed by whitespace or end (closing quotes and brackets attach); "
    "list item lines are separate segments; an unterminated tail is type other; segments without letters or digits "
    "are dropped",
    "characters: non-whitespace code points of the raw text except *; list markers such as - and 1. count",
    "words: whitespace-delimited tokens of the same markup-free text",
    "punctuation: . , ! ? ; : — ( ) [ ] \" ' … and curly quotes, one per code point",
    "lists: lines starting with - * + then a space; indentation of 2+ columns (tab = 4) is nested",
    "numbered items: lines starting with digits followed by . or ) then a space",
    "bold: text between paired ** markers within a paragraph, duplicates kept, case-sensitive",
    "language: majority script among Latin, Cyrillic, CJK letters, else unknown",
    "beginning/ending: first/last 64 code points; matching is case-insensitive and word-bounded, ending ignores "
    "trailing terminal punctuation and closing quotes",
    "keywords: case-insensitive whole-word occurrences",
    "bounds: all numeric comparisons are inclusive",
};

std::string encode_param(const Parameter& p) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Rational>) {
          return "num:" + v.to_string();
        } else if constexpr (std::is_same_v<T, std::string>) {
          return "text:" + json(v).dump();
        } else if constexpr (std::is_same_v<T, TextList>) {
          return "texts:" + json(v.items).dump();
        } else if constexpr (std::is_same_v<T, PropertyList>) {
          std::string out = "props:[";
          for (std::size_t i = 0; i < v.items.size(); ++i) {
            if (i) out += ",";
            out += std::string(to_string(v.items[i]));
          }
          return out + "]";
        } else {
          return "dim:" + std::string(to_string(v));
        }
      },
      p);
}

bool inclusive_bound(Condition c) {
  return c == Condition::interval || c == Condition::no_more_than || c == Condition::no_less_than ||
         c == Condition::maximum_value || c == Condition::minimum_value;
}

void emit(const Predicate& p, int depth, std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  if (p.combinator()) {
    out += indent + "begin " + std::string(to_string(p.condition)) + "\n";
    for (const auto& c : p.children) emit(c, depth + 1, out);
    out += indent + "end\n";
    return;
  }
  out += indent + "leaf dimension=" + std::string(to_string(*p.dimension)) +
         " measurement=" + std::string(to_string(measurement_of(*p.dimension))) +
         " condition=" + std::string(to_string(p.condition));
  const auto& slots = kind_of(p.condition).parameters;
  for (std::size_t i = 0; i < p.parameters.size() && i < slots.size(); ++i) {
    out += " " + std::string(slots[i].name) + "=" + encode_param(p.parameters[i]);
  }
  if (!p.terms.empty()) out += " terms=" + encode_param(TextList{p.terms});
  if (inclusive_bound(p.condition)) out += " inclusive=true";
  out += "\n";
}

// Splits "key=value key=value" where values may be JSON strings or arrays.
std::vector<std::pair<std::string, std::string>> fields(std::string_view s, std::size_t line) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    if (i >= s.size()) break;
    std::size_t eq = s.find('=', i);
    if (eq == std::string_view::npos) throw ParseError("expected key=value at '" + std::string(s.substr(i)) + "'", line);
    std::string key(s.substr(i, eq - i));
    std::size_t j = eq + 1;
    bool in_string = false;
    int depth = 0;
    for (; j < s.size(); ++j) {
      char c = s[j];
      if (in_string) {
        if (c == '\\') {
          ++j;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '[') {
        ++depth;
      } else if (c == ']') {
        --depth;
      } else if (c == ' ' && depth == 0) {
        break;
      }
    }
    if (in_string || depth != 0) throw ParseError("unterminated value for '" + key + "'", line);
    out.emplace_back(std::move(key), std::string(s.substr(eq + 1, j - eq - 1)));
    i = j;
  }
  return out;
}

Parameter decode_param(const std::string& v, std::size_t line) {
  auto starts = [&](std::string_view prefix) { return v.compare(0, prefix.size(), prefix) == 0; };
  try {
    if (starts("num:")) return Rational::parse(v.substr(4));
    if (starts("text:")) return json::parse(v.substr(5)).get<std::string>();
    if (starts("texts:")) return TextList{json::parse(v.substr(6)).get<std::vector<std::string>>()};
    if (starts("dim:")) {
      auto d = dimension_from_string(v.substr(4));
      if (!d) throw ParseError("unknown dimension '" + v.substr(4) + "'", line);
      return *d;
    }
    if (starts("props:[") && v.back() == ']') {
      PropertyList list;
      std::string body = v.substr(7, v.size() - 8);
      std::stringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto prop = property_from_string(item);
        if (!prop) throw ParseError("unknown property '" + item + "'", line);
        list.items.push_back(*prop);
      }
      return list;
    }
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError("bad parameter value '" + v + "': " + e.what(), line);
  }
  throw ParseError("unknown parameter encoding '" + v + "'", line);
}

Predicate parse_leaf(std::string_view rest, std::size_t line) {
  Predicate p;
  std::optional<Condition> condition;
  std::vector<std::pair<std::string, std::string>> params;
  for (auto& [key, value] : fields(rest, line)) {
    if (key == "dimension") {
      p.dimension = dimension_from_string(value);
      if (!p.dimension) throw ParseError("unknown dimension '" + value + "'", line);
    } else if (key == "condition") {
      condition = condition_from_string(value);
      if (!condition) throw ParseError("unknown condition '" + value + "'", line);
    } else if (key == "measurement" || key == "inclusive") {
      // informational
    } else if (key == "terms") {
      auto t = decode_param(value, line);
      if (!std::holds_alternative<TextList>(t)) throw ParseError("terms must be a text list", line);
      p.terms = std::get<TextList>(t).items;
    } else {
      params.emplace_back(key, value);
    }
  }
  if (!p.dimension || !condition) throw ParseError("leaf needs dimension= and condition=", line);
  p.condition = *condition;
  const auto& slots = kind_of(p.condition).parameters;
  if (params.size() != slots.size()) {
    throw ParseError("condition " + std::string(kind_of(p.condition).name) + " takes " + std::to_string(slots.size()) +
                         " parameters",
                     line);
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (params[i].first != slots[i].name) {
      throw ParseError("expected parameter '" + std::string(slots[i].name) + "', found '" + params[i].first + "'", line);
    }
    p.parameters.push_back(decode_param(params[i].second, line));
  }
  return p;
}

}  // namespace

std::string export_verifier_spec(const Predicate& p) {
  std::string out(kVerifierSpecFormat);
  out += "\nrules-version " + std::string(kMeasurementRulesVersion) + "\n";
  for (auto rule : kRules) out += "rule " + std::string(rule) + "\n";
  emit(p, 0, out);
  return out;
}

Predicate parse_verifier_spec(std::string_view document) {
  std::istringstream in{std::string(document)};
  std::string raw;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<Predicate> stack;
  std::optional<Predicate> root;
  auto attach = [&](Predicate p, std::size_t line) {
    if (!stack.empty()) {
      stack.back().children.push_back(std::move(p));
    } else if (root) {
      throw ParseError("more than one top-level predicate", line);
    } else {
      root = std::move(p);
    }
  };
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string_view line = raw;
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kVerifierSpecFormat) throw ParseError("missing '" + std::string(kVerifierSpecFormat) + "' header", line_no);
      header = true;
      continue;
    }
    auto word_end = line.find(' ');
    std::string_view word = line.substr(0, word_end);
    std::string_view rest = word_end == std::string_view::npos ? std::string_view{} : line.substr(word_end + 1);
    if (word == "rules-version") {
      if (rest != kMeasurementRulesVersion) {
        throw ParseError("unsupported rules version '" + std::string(rest) + "'", line_no);
      }
    } else if (word == "rule") {
      continue;
    } else if (word == "begin") {
      auto c = condition_from_string(rest);
      if (!c || !kind_of(*c).combinator) throw ParseError("'begin' needs a combinator, got '" + std::string(rest) + "'", line_no);
      Predicate p;
      p.condition = *c;
      stack.push_back(std::move(p));
    } else if (word == "end") {
      if (stack.empty()) throw ParseError("'end' without 'begin'", line_no);
      Predicate p = std::move(stack.back());
      stack.pop_back();
      attach(std::move(p), line_no);
    } else if (word == "leaf") {
      attach(parse_leaf(rest, line_no), line_no);
    } else {
      throw ParseError("unknown directive '" + std::string(word) + "'", line_no);
    }
  }
  if (!header) throw ParseError("empty verifier spec", line_no + 1);
  if (!stack.empty()) throw ParseError("unclosed 'begin'", line_no + 1);
  if (!root) throw ParseError("no predicate in spec", line_no + 1);
  try {
    check_predicate(*root);
  } catch (const CompileError& e) {
    throw ParseError(e.what(), line_no);
  }
  return *root;
}

}  // namespace ergkit
