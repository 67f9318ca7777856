#include <algorithm>
#include <cctype>
#include <functional>

#include "ergkit/error.hpp"
#include "ergkit/synthesis.hpp"

namespace ergkit {
namespace {

struct Range {
  std::int64_t lo;
  std::int64_t hi;
};

// Values a constraint on each count dimension may resolve to. Chosen so that
// one response of modest length can meet several constraints at once.
Range count_range(Dimension d) {
  switch (d) {
    case Dimension::paragraph_count:
      return {2, 7};
    case Dimension::sentence_count:
      return {3, 14};
    case Dimension::word_count:
      return {30, 200};
    case Dimension::character_count:
      return {60, 800};
    case Dimension::punctuation_count:
      return {4, 36};
    case Dimension::bold_word_count:
      return {1, 9};
    case Dimension::unordered_list_item_count:
      return {2, 9};
    case Dimension::numbered_list_item_count:
      return {2, 8};
    case Dimension::quotation_count:
    case Dimension::bracketed_term_count:
      return {1, 5};
    case Dimension::line_count:
      return {3, 18};
    case Dimension::special_symbol_count:
      return {1, 8};
    case Dimension::keyword_count:
      return {1, 5};
    default:
      return {1, 5};
  }
}

bool small_count(Dimension d) {
  const Range r = count_range(d);
  return r.hi - r.lo <= 10;
}

// Keyword terms for keyword_count. None is a filler word or a bank answer.
constexpr std::string_view kKeywordPool[] = {
    "essential", "practice", "focus", "progress", "insight", "strategy", "routine", "effort", "resource", "priority",
};

struct Step {
  Operation op;
  std::int64_t k;
};

struct Chain {
  std::vector<Step> steps;
  std::int64_t value;
};

std::vector<Chain> chains_from(std::int64_t a, Range r, bool allow_identity) {
  std::vector<Chain> out;
  auto keep = [&](std::vector<Step> steps, std::int64_t v) {
    // An operand equal to the answer would print the answer next to its question.
    for (const auto& s : steps) {
      if (s.k == a) return;
    }
    if (v >= r.lo && v <= r.hi) out.push_back({std::move(steps), v});
  };
  if (allow_identity) keep({}, a);
  for (std::int64_t k = 1; k <= 20; ++k) {
    keep({{Operation::addition, k}}, a + k);
    if (a - k > 0) keep({{Operation::subtraction, k}}, a - k);
  }
  for (std::int64_t k = 2; k <= 6; ++k) keep({{Operation::multiplication, k}}, a * k);
  for (std::int64_t k = 2; k <= 12; ++k) {
    if (a % k == 0) keep({{Operation::division, k}}, a / k);
  }
  for (std::int64_t k1 = 2; k1 <= 4; ++k1) {
    for (std::int64_t k2 = 1; k2 <= 9; ++k2) {
      keep({{Operation::multiplication, k1}, {Operation::addition, k2}}, a * k1 + k2);
      if (a * k1 - k2 > 0) keep({{Operation::multiplication, k1}, {Operation::subtraction, k2}}, a * k1 - k2);
    }
  }
  for (std::int64_t k1 = 2; k1 <= 10; ++k1) {
    if (a % k1 != 0) continue;
    for (std::int64_t k2 = 1; k2 <= 5; ++k2) {
      keep({{Operation::division, k1}, {Operation::addition, k2}}, a / k1 + k2);
      if (a / k1 - k2 > 0) keep({{Operation::division, k1}, {Operation::subtraction, k2}}, a / k1 - k2);
    }
  }
  return out;
}

std::string node_id(std::size_t i) {
  std::string id;
  do {
    id.insert(id.begin(), static_cast<char>('A' + i % 26));
    i = i / 26;
  } while (i-- > 0);
  return id;
}

class Builder {
 public:
  explicit Builder(const Banks& banks) : banks_(banks) {}

  std::string knowledge(const KnowledgeFact& f) {
    for (const auto& n : erg_.nodes) {
      if (const auto* k = std::get_if<KnowledgePayload>(&n.payload); k && k->fact_id == f.id) return n.id;
    }
    return add(KnowledgePayload{f.id}, {});
  }

  std::string math(Operation op, std::vector<std::optional<Rational>> operands, std::vector<std::string> parents) {
    MathPayload payload{op, std::move(operands)};
    for (const auto& n : erg_.nodes) {
      if (const auto* m = std::get_if<MathPayload>(&n.payload); m && *m == payload && erg_.parents(n.id) == parents) {
        return n.id;
      }
    }
    return add(std::move(payload), parents);
  }

  std::string apply(std::string from, const std::vector<Step>& steps) {
    for (const auto& s : steps) from = math(s.op, {std::nullopt, Rational(s.k)}, {from});
    return from;
  }

  std::string condition(ConditionPayload payload, std::vector<std::string> parents) {
    return add(std::move(payload), parents);
  }

  const Banks& banks() const { return banks_; }

  Erg finish() {
    for (auto& n : erg_.nodes) n.description = describe_node(n);
    return std::move(erg_);
  }

  std::string describe_node(const ErgNode& n) const;

 private:
  std::string add(NodePayload payload, const std::vector<std::string>& parents) {
    auto id = node_id(erg_.nodes.size());
    erg_.nodes.push_back({id, std::move(payload), {}});
    for (const auto& p : parents) erg_.edges.push_back({p, id});
    return id;
  }

  const Banks& banks_;
  Erg erg_;
};

// ---------------------------------------------------------------------------
// Phrasing shared by node descriptions (references by node id) and drafts
// (references spelled out as questions and arithmetic).

using Ref = std::function<std::string(const std::string&)>;

std::string multiplier_word(std::int64_t k) {
  static constexpr std::string_view words[] = {"", "", "twice", "three times", "four times", "five times",
                                               "six times", "seven times", "eight times", "nine times", "ten times"};
  if (k >= 2 && k <= 10) return std::string(words[k]);
  return std::to_string(k) + " times";
}

std::string dimension_noun(Dimension d, const std::vector<std::string>& terms) {
  switch (d) {
    case Dimension::paragraph_count:
      return "the number of paragraphs";
    case Dimension::sentence_count:
      return "the number of sentences";
    case Dimension::word_count:
      return "the number of words";
    case Dimension::character_count:
      return "the number of non-whitespace characters";
    case Dimension::punctuation_count:
      return "the number of punctuation marks";
    case Dimension::bold_word_count:
      return "the number of bolded spans";
    case Dimension::unordered_list_item_count:
      return "the number of bullet-list items";
    case Dimension::numbered_list_item_count:
      return "the number of numbered-list items";
    case Dimension::quotation_count:
      return "the number of passages in double quotes";
    case Dimension::bracketed_term_count:
      return "the number of terms in square brackets";
    case Dimension::line_count:
      return "the number of non-empty lines";
    case Dimension::special_symbol_count:
      return "the number of special symbols such as & or %";
    case Dimension::keyword_count: {
      std::string list;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) list += i + 1 == terms.size() ? " or " : ", ";
        list += "\"" + terms[i] + "\"";
      }
      return "the number of times the word " + list + " is used";
    }
    default:
      return std::string(to_string(d));
  }
}

std::string property_phrase(Property p) {
  switch (p) {
    case Property::prime:
      return "a prime number";
    case Property::composite:
      return "a composite number";
    case Property::square:
      return "a perfect square";
    default:
      return std::string(to_string(p));
  }
}

std::string join_or(const std::vector<std::string>& parts, std::string_view last) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += i + 1 == parts.size() ? std::string(" ") + std::string(last) + " " : ", ";
    out += parts[i];
  }
  return out;
}

std::string literal(const Parameter& p) {
  if (const auto* d = std::get_if<Dimension>(&p)) return dimension_noun(*d, {});
  if (const auto* s = std::get_if<std::string>(&p)) return "\"" + *s + "\"";
  if (const auto* l = std::get_if<TextList>(&p)) {
    std::vector<std::string> quoted;
    for (const auto& s : l->items) quoted.push_back("\"" + s + "\"");
    return join_or(quoted, "or");
  }
  return describe(p);
}

// Parameter slots of a condition node rendered with `ref` for parent values.
std::vector<std::string> slot_texts(const Erg& erg, const ErgNode& n, const ConditionPayload& c, const Ref& ref) {
  std::vector<std::string> value_parents;
  for (const auto& p : erg.parents(n.id)) {
    const auto* pn = erg.find(p);
    if (pn && pn->kind() != NodeKind::conditional) value_parents.push_back(p);
  }
  std::vector<std::string> out;
  std::size_t next = 0;
  for (const auto& slot : c.parameters) {
    if (slot) {
      out.push_back(literal(*slot));
    } else if (next < value_parents.size()) {
      out.push_back(ref(value_parents[next++]));
    } else {
      out.emplace_back("?");
    }
  }
  return out;
}

std::string props_phrase(const std::vector<std::string>& slots, const ConditionPayload& c, bool required) {
  // Literal property lists print as "{a, b}"; re-spell them.
  if (!c.parameters.empty() && c.parameters[0]) {
    if (const auto* pl = std::get_if<PropertyList>(&*c.parameters[0])) {
      std::vector<std::string> words;
      for (auto p : pl->items) words.push_back(property_phrase(p));
      return required ? join_or(words, "and") : join_or(words, "nor");
    }
  }
  return slots.empty() ? std::string("?") : slots[0];
}

std::string leaf_clause(const Erg& erg, const ErgNode& n, const ConditionPayload& c, const Ref& ref) {
  const auto s = slot_texts(erg, n, c, ref);
  const Dimension d = *c.dimension;
  const bool req = c.condition == Condition::required;
  auto texts_of = [&](std::size_t i) { return i < s.size() ? s[i] : std::string("?"); };
  switch (measurement_of(d)) {
    case MeasurementKind::count: {
      const auto noun = dimension_noun(d, c.terms);
      switch (c.condition) {
        case Condition::no_more_than:
        case Condition::maximum_value:
          return noun + " must not exceed " + texts_of(0);
        case Condition::no_less_than:
        case Condition::minimum_value:
          return noun + " must be at least " + texts_of(0);
        case Condition::interval:
          return noun + " must lie between " + texts_of(0) + " and " + texts_of(1) + ", both included";
        case Condition::equal_to:
          return noun + " must be exactly " + texts_of(0);
        case Condition::not_equal_to:
          return noun + " must differ from " + texts_of(0);
        case Condition::positive_integer_multiple_of:
          return noun + " must be a positive whole multiple of " + texts_of(0);
        case Condition::required:
          return noun + " must be " + props_phrase(s, c, true);
        case Condition::forbidden:
          return noun + " must be neither " + props_phrase(s, c, false);
        default:
          break;
      }
      break;
    }
    case MeasurementKind::sequence:
      switch (c.condition) {
        case Condition::maximum_value:
          return "no paragraph may hold more than " + texts_of(0) + " sentences";
        case Condition::minimum_value:
          return "every paragraph must hold at least " + texts_of(0) + " sentences";
        case Condition::consecutive_fibonacci_terms:
          return "the sentence counts of the paragraphs, read in order, must be consecutive terms of the Fibonacci sequence";
        case Condition::required:
          if (s[0] == "{distinct}") return "no two paragraphs may hold the same number of sentences";
          return "the sentence count of every paragraph must be " + props_phrase(s, c, true);
        case Condition::forbidden:
          return "the sentence count of every paragraph must be neither " + props_phrase(s, c, false);
        default:
          break;
      }
      break;
    case MeasurementKind::set: {
      const std::string where = d == Dimension::bold_word_set          ? "in bold"
                                : d == Dimension::unordered_list_items ? "as a bullet-list item"
                                                                       : "";
      const std::string what = d == Dimension::bold_word_set ? "the bolded spans" : "the bullet-list items";
      if (c.condition == Condition::strictly_ascending_by_length) {
        return what + " must get strictly longer from first to last";
      }
      const bool distinct = !s.empty() && s[0] == "{distinct}";
      if (d == Dimension::sentence_type_mix) {
        const auto* tl = c.parameters[0] ? std::get_if<TextList>(&*c.parameters[0]) : nullptr;
        std::vector<std::string> kinds = tl ? tl->items : std::vector<std::string>{};
        if (req) return "the reply must contain at least one " + join_or(kinds, "and one") + " sentence";
        if (kinds.size() == 1 && kinds[0] == "other") {
          return "every sentence must close with a period, a question mark or an exclamation mark";
        }
        return "the reply must not contain any " + join_or(kinds, "or") + " sentence";
      }
      if (d == Dimension::keyword_set) {
        return req ? "the reply must mention " + texts_of(0) : "the reply must never mention " + texts_of(0);
      }
      if (distinct) return req ? what + " must all differ from one another" : what + " must include a repeat";
      return req ? texts_of(0) + " must appear " + where : texts_of(0) + " must not appear " + where;
    }
    case MeasurementKind::text: {
      if (d == Dimension::language) {
        return c.condition == Condition::not_equal_to ? "the reply must not be written in " + texts_of(0)
                                                      : "the whole reply must be written in " + texts_of(0);
      }
      const std::string edge = d == Dimension::beginning_of_reply ? "begin" : "end";
      switch (c.condition) {
        case Condition::equal_to:
        case Condition::required:
          return "the reply must " + edge + " with " + texts_of(0);
        case Condition::not_equal_to:
        case Condition::forbidden:
          return "the reply must not " + edge + " with " + texts_of(0);
        default:
          break;
      }
      break;
    }
  }
  return std::string(to_string(c.condition)) + " over " + std::string(to_string(d));
}

std::string math_phrase(const Erg& erg, const ErgNode& n, const MathPayload& m, const Ref& ref, bool nested_refs) {
  const auto parents = erg.parents(n.id);
  std::size_t next = 0;
  std::vector<std::pair<std::string, std::optional<Rational>>> operands;
  std::vector<bool> compound;
  for (const auto& o : m.operands) {
    if (o) {
      operands.push_back({o->to_string(), o});
      compound.push_back(false);
    } else {
      const auto& pid = next < parents.size() ? parents[next++] : std::string("?");
      operands.push_back({ref(pid), std::nullopt});
      const auto* pn = erg.find(pid);
      compound.push_back(nested_refs && pn && pn->kind() == NodeKind::mathematical);
    }
  }
  if (operands.empty()) return "?";
  std::string acc = operands[0].first;
  bool acc_compound = compound[0];
  for (std::size_t i = 1; i < operands.size(); ++i) {
    const auto& [text, lit] = operands[i];
    switch (m.op) {
      case Operation::addition:
        acc = acc + (acc_compound ? ", plus " : " plus ") + text;
        break;
      case Operation::subtraction:
        acc = acc + (acc_compound ? ", minus " : " minus ") + text;
        break;
      case Operation::multiplication:
        if (acc_compound) acc = "(" + acc + ")";
        acc = lit && lit->is_integer() ? multiplier_word(lit->num()) + " " + acc : acc + " multiplied by " + text;
        break;
      case Operation::division:
        if (acc_compound) acc = "(" + acc + ")";
        acc = acc + " divided by " + text;
        break;
    }
    acc_compound = true;
  }
  return acc;
}

std::string combinator_clause(const Erg& erg, const ErgNode& n, const std::function<std::string(const ErgNode&)>& leaf,
                              bool any) {
  std::vector<std::string> parts;
  for (const auto& p : erg.parents(n.id)) {
    const auto* pn = erg.find(p);
    if (pn && pn->kind() == NodeKind::conditional) parts.push_back(leaf(*pn));
  }
  if (any) return "at least one of the following must hold: " + join_or(parts, "or");
  return join_or(parts, "and");
}

std::string Builder::describe_node(const ErgNode& n) const {
  const Ref by_id = [](const std::string& id) { return id; };
  if (const auto* k = std::get_if<KnowledgePayload>(&n.payload)) {
    return "Recall " + lookup_fact(banks_, k->fact_id).question;
  }
  if (const auto* m = std::get_if<MathPayload>(&n.payload)) {
    const auto parents = erg_.parents(n.id);
    std::vector<std::string> ops;
    std::size_t next = 0;
    for (const auto& o : m->operands) ops.push_back(o ? o->to_string() : next < parents.size() ? parents[next++] : "?");
    switch (m->op) {
      case Operation::addition:
        return ops.size() == 2 && m->operands[1] ? "Add " + ops[1] + " to " + ops[0] : "Add " + join_or(ops, "and");
      case Operation::subtraction:
        return ops.size() == 2 ? "Subtract " + ops[1] + " from " + ops[0] : "Subtract in order " + join_or(ops, "then");
      case Operation::multiplication:
        return "Multiply " + join_or(ops, "by");
      case Operation::division:
        return "Divide " + join_or(ops, "by");
    }
  }
  const auto& c = std::get<ConditionPayload>(n.payload);
  if (kind_of(c.condition).combinator) {
    std::vector<std::string> kids;
    for (const auto& p : erg_.parents(n.id)) kids.push_back(p);
    return c.condition == Condition::logical_and ? "Require all of " + join_or(kids, "and") + " to hold"
                                                 : "Require at least one of " + join_or(kids, "or") + " to hold";
  }
  return "Check that " + leaf_clause(erg_, n, c, by_id);
}

// ---------------------------------------------------------------------------
// Recipes

const KnowledgeFact* pick_fact(const Banks& banks, Rng& rng, const std::function<bool(const KnowledgeFact&)>& ok) {
  std::vector<const KnowledgeFact*> pool;
  for (const auto& f : banks.facts()) {
    if (ok(f)) pool.push_back(&f);
  }
  if (pool.empty()) return nullptr;
  return pool[rng.index(pool.size())];
}

bool is_script_fact(const KnowledgeFact& f) {
  if (f.is_numeric()) return false;
  const auto& a = std::get<std::string>(f.answer);
  return a == "latin" || a == "cyrillic" || a == "cjk";
}

// A value node (knowledge plus arithmetic) resolving into `r`.
std::optional<std::string> value_node(Builder& b, Range r, Rng& rng, bool allow_identity = true) {
  std::vector<const KnowledgeFact*> numeric;
  for (const auto& f : b.banks().facts()) {
    if (f.is_numeric()) numeric.push_back(&f);
  }
  rng.shuffle(numeric);
  // Occasionally combine two facts.
  if (numeric.size() >= 2 && rng.chance(0.2)) {
    for (std::size_t i = 0; i + 1 < numeric.size() && i < 12; ++i) {
      const auto* fa = numeric[i];
      const auto* fb = numeric[i + 1];
      const auto a = std::get<std::int64_t>(fa->answer), c = std::get<std::int64_t>(fb->answer);
      std::vector<std::pair<Operation, std::int64_t>> options;
      if (a + c >= r.lo && a + c <= r.hi) options.push_back({Operation::addition, a + c});
      if (a - c >= r.lo && a - c <= r.hi) options.push_back({Operation::subtraction, a - c});
      if (a * c >= r.lo && a * c <= r.hi) options.push_back({Operation::multiplication, a * c});
      if (c != 0 && a % c == 0 && a / c >= r.lo && a / c <= r.hi) options.push_back({Operation::division, a / c});
      if (options.empty()) continue;
      const auto [op, _] = options[rng.index(options.size())];
      const auto ka = b.knowledge(*fa);
      const auto kc = b.knowledge(*fb);
      return b.math(op, {std::nullopt, std::nullopt}, {ka, kc});
    }
  }
  for (const auto* f : numeric) {
    auto chains = chains_from(std::get<std::int64_t>(f->answer), r, allow_identity);
    if (chains.empty()) continue;
    // Prefer chains with arithmetic; identity stays rare.
    std::vector<Chain> preferred;
    for (auto& c : chains) {
      if (!c.steps.empty() || rng.chance(0.15)) preferred.push_back(c);
    }
    if (preferred.empty()) preferred = chains;
    const auto& c = preferred[rng.index(preferred.size())];
    return b.apply(b.knowledge(*f), c.steps);
  }
  return std::nullopt;
}

ConditionPayload leaf(Condition c, Dimension d, std::vector<std::optional<Parameter>> params = {}) {
  ConditionPayload p;
  p.condition = c;
  p.dimension = d;
  p.parameters = std::move(params);
  p.parameters.resize(kind_of(c).arity());
  return p;
}

ConditionPayload combine(Condition c) {
  ConditionPayload p;
  p.condition = c;
  return p;
}

PropertyList random_props(Rng& rng, bool required) {
  // Property sets that leave a satisfiable count in the usual ranges.
  static const std::vector<std::vector<Property>> req = {
      {Property::odd}, {Property::even}, {Property::positive, Property::odd}, {Property::prime},
      {Property::composite}, {Property::positive, Property::even}};
  static const std::vector<std::vector<Property>> forb = {
      {Property::prime}, {Property::even}, {Property::odd}, {Property::prime, Property::even}, {Property::square}};
  return PropertyList{required ? rng.pick(req) : rng.pick(forb)};
}

void count_recipe(Builder& b, Dimension d, Rng& rng) {
  const Range r = count_range(d);
  ConditionPayload base;
  std::vector<std::string> terms;
  if (d == Dimension::keyword_count) terms.emplace_back(kKeywordPool[rng.index(std::size(kKeywordPool))]);
  auto with_terms = [&](ConditionPayload p) {
    p.terms = terms;
    return p;
  };
  const bool small = small_count(d);
  const int variant = static_cast<int>(rng.index(small ? 7 : 6));
  auto fallback = [&] {
    b.condition(with_terms(leaf(Condition::no_less_than, d, {Rational(r.lo)})), {});
  };
  switch (variant) {
    case 0: {  // upper bound
      auto v = value_node(b, {r.lo + 1, r.hi}, rng);
      if (!v) return fallback();
      b.condition(with_terms(leaf(Condition::no_more_than, d)), {*v});
      return;
    }
    case 1: {  // lower bound
      auto v = value_node(b, {r.lo, r.lo + (r.hi - r.lo) / 2}, rng);
      if (!v) return fallback();
      b.condition(with_terms(leaf(Condition::no_less_than, d)), {*v});
      return;
    }
    case 2: {  // interval from one fact, two chains
      const std::int64_t width = std::max<std::int64_t>(2, (r.hi - r.lo) / 5);
      for (int attempt = 0; attempt < 20; ++attempt) {
        const auto* f = pick_fact(b.banks(), rng, [](const KnowledgeFact& k) { return k.is_numeric(); });
        if (!f) break;
        auto lows = chains_from(std::get<std::int64_t>(f->answer), {r.lo, r.hi - width}, false);
        if (lows.empty()) continue;
        const auto low = lows[rng.index(lows.size())];
        auto highs = chains_from(std::get<std::int64_t>(f->answer), {low.value + width, r.hi}, false);
        if (highs.empty()) continue;
        const auto high = highs[rng.index(highs.size())];
        const auto k = b.knowledge(*f);
        const auto lo = b.apply(k, low.steps);
        const auto hi = b.apply(k, high.steps);
        b.condition(with_terms(leaf(Condition::interval, d)), {lo, hi});
        return;
      }
      return fallback();
    }
    case 3: {  // multiple of
      if (d == Dimension::punctuation_count && rng.chance(0.5)) {
        b.condition(leaf(Condition::positive_integer_multiple_of, d, {Dimension::sentence_count}), {});
        return;
      }
      auto v = value_node(b, {2, small ? 3 : 5}, rng);
      if (!v) return fallback();
      b.condition(with_terms(leaf(Condition::positive_integer_multiple_of, d)), {*v});
      return;
    }
    case 4: {  // bound combined with an exclusion
      auto lo = value_node(b, {r.lo, r.lo + (r.hi - r.lo) / 3}, rng);
      auto ex = value_node(b, {r.lo + 1, r.hi}, rng);
      if (!lo || !ex) return fallback();
      const auto c1 = b.condition(with_terms(leaf(Condition::no_less_than, d)), {*lo});
      const auto c2 = b.condition(with_terms(leaf(Condition::not_equal_to, d)), {*ex});
      b.condition(combine(Condition::logical_and), {c1, c2});
      return;
    }
    case 5: {  // arithmetic properties
      if (rng.chance(0.5)) {
        const auto c1 = b.condition(with_terms(leaf(Condition::required, d, {PropertyList{{Property::positive}}})), {});
        const auto c2 = b.condition(with_terms(leaf(Condition::forbidden, d, {random_props(rng, false)})), {});
        b.condition(combine(Condition::logical_and), {c1, c2});
      } else {
        b.condition(with_terms(leaf(Condition::required, d, {random_props(rng, true)})), {});
      }
      return;
    }
    default: {  // exact value, small counts only
      auto v = value_node(b, r, rng);
      if (!v) return fallback();
      b.condition(with_terms(leaf(Condition::equal_to, d)), {*v});
      return;
    }
  }
}

std::optional<std::string> text_fact_node(Builder& b, Rng& rng) {
  const auto* f = pick_fact(b.banks(), rng, [](const KnowledgeFact& k) { return !k.is_numeric() && !is_script_fact(k); });
  if (!f) return std::nullopt;
  return b.knowledge(*f);
}

void collection_recipe(Builder& b, Dimension d, Rng& rng) {
  const Dimension count_dim = d == Dimension::bold_word_set ? Dimension::bold_word_count : Dimension::unordered_list_item_count;
  switch (rng.index(4)) {
    case 0:
      if (auto k = text_fact_node(b, rng)) {
        b.condition(leaf(Condition::required, d), {*k});
        return;
      }
      [[fallthrough]];
    case 1:
      b.condition(leaf(Condition::required, d, {PropertyList{{Property::distinct}}}), {});
      return;
    case 2:
      b.condition(leaf(Condition::strictly_ascending_by_length, d), {});
      return;
    default: {
      // Count bounds plus shape requirements joined by a combinator.
      auto lo = value_node(b, {2, 4}, rng);
      std::vector<std::string> kids;
      if (lo) kids.push_back(b.condition(leaf(Condition::no_less_than, count_dim), {*lo}));
      kids.push_back(b.condition(leaf(Condition::required, d, {PropertyList{{Property::distinct}}}), {}));
      if (rng.chance(0.5)) kids.push_back(b.condition(leaf(Condition::strictly_ascending_by_length, d), {}));
      b.condition(combine(Condition::logical_and), kids);
      return;
    }
  }
}

void sequence_recipe(Builder& b, Rng& rng) {
  const Dimension d = Dimension::per_paragraph_sentence_counts;
  switch (rng.index(4)) {
    case 0:
      if (auto v = value_node(b, {2, 5}, rng)) {
        b.condition(leaf(Condition::maximum_value, d), {*v});
        return;
      }
      [[fallthrough]];
    case 1:
      if (auto v = value_node(b, {2, 3}, rng)) {
        b.condition(leaf(Condition::minimum_value, d), {*v});
        return;
      }
      [[fallthrough]];
    case 2: {
      const auto fib = b.condition(leaf(Condition::consecutive_fibonacci_terms, d), {});
      if (rng.chance(0.6)) {
        if (auto v = value_node(b, {3, 4}, rng)) {
          const auto count = b.condition(leaf(Condition::equal_to, Dimension::paragraph_count), {*v});
          b.condition(combine(Condition::logical_and), {fib, count});
        }
      }
      return;
    }
    default:
      b.condition(leaf(Condition::required, d, {PropertyList{{Property::distinct}}}), {});
      return;
  }
}

void sentence_mix_recipe(Builder& b, Rng& rng) {
  const Dimension d = Dimension::sentence_type_mix;
  std::vector<std::string> kinds = {"declarative", "interrogative", "exclamatory"};
  rng.shuffle(kinds);
  kinds.resize(1 + rng.index(3));
  std::sort(kinds.begin(), kinds.end());
  switch (rng.index(3)) {
    case 0:
      b.condition(leaf(Condition::required, d, {TextList{kinds}}), {});
      return;
    case 1:
      b.condition(leaf(Condition::forbidden, d, {TextList{{"other"}}}), {});
      return;
    default: {
      const auto c1 = b.condition(leaf(Condition::required, d, {TextList{kinds}}), {});
      const auto c2 = b.condition(leaf(Condition::forbidden, d, {TextList{{"other"}}}), {});
      b.condition(combine(Condition::logical_and), {c1, c2});
      return;
    }
  }
}

bool has_text_facts(const Banks& banks) {
  return std::any_of(banks.facts().begin(), banks.facts().end(),
                     [](const KnowledgeFact& f) { return !f.is_numeric() && !is_script_fact(f); });
}

bool has_script_facts(const Banks& banks) {
  return std::any_of(banks.facts().begin(), banks.facts().end(), is_script_fact);
}

bool has_numeric_facts(const Banks& banks) {
  return std::any_of(banks.facts().begin(), banks.facts().end(), [](const KnowledgeFact& f) { return f.is_numeric(); });
}

bool drawable(const Banks& banks, Dimension d) {
  switch (d) {
    case Dimension::language:
      return has_script_facts(banks);
    case Dimension::beginning_of_reply:
    case Dimension::ending_of_reply:
    case Dimension::keyword_set:
      return has_text_facts(banks);
    case Dimension::sentence_type_mix:
    case Dimension::bold_word_set:
    case Dimension::unordered_list_items:
    case Dimension::per_paragraph_sentence_counts:
      return true;
    default:
      return has_numeric_facts(banks);
  }
}

// ---------------------------------------------------------------------------
// Draft phrasing

std::string phrase(const Erg& erg, const Banks& banks, const std::string& id) {
  const auto* n = erg.find(id);
  if (!n) return id;
  if (const auto* k = std::get_if<KnowledgePayload>(&n->payload)) return lookup_fact(banks, k->fact_id).question;
  if (const auto* m = std::get_if<MathPayload>(&n->payload)) {
    const Ref ref = [&](const std::string& p) { return phrase(erg, banks, p); };
    return math_phrase(erg, *n, *m, ref, true);
  }
  return id;
}

std::string clause(const Erg& erg, const Banks& banks, const ErgNode& n) {
  const auto& c = std::get<ConditionPayload>(n.payload);
  const Ref ref = [&](const std::string& p) { return phrase(erg, banks, p); };
  if (kind_of(c.condition).combinator) {
    return combinator_clause(erg, n, [&](const ErgNode& k) { return clause(erg, banks, k); },
                             c.condition == Condition::logical_or);
  }
  return leaf_clause(erg, n, c, ref);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

bool bounded_at(const std::string& hay, std::size_t pos, std::size_t len, bool digits) {
  auto inside = [&](char ch) {
    const auto u = static_cast<unsigned char>(ch);
    return digits ? std::isdigit(u) != 0 : (std::isalnum(u) != 0 || u >= 0x80);
  };
  const bool left = pos == 0 || !inside(hay[pos - 1]);
  const bool right = pos + len >= hay.size() || !inside(hay[pos + len]);
  return left && right;
}

bool contains_bounded(const std::string& hay, const std::string& needle, bool digits) {
  if (needle.empty()) return false;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    if (bounded_at(hay, pos, needle.size(), digits)) return true;
  }
  return false;
}

}  // namespace

std::vector<Dimension> drawable_dimensions(const Banks& banks) {
  std::vector<Dimension> out;
  for (auto d : banks.dimensions()) {
    if (drawable(banks, d)) out.push_back(d);
  }
  return out;
}

namespace {

Erg draw_once(const Banks& banks, Dimension d, Rng& rng) {
  Builder b(banks);
  switch (d) {
    case Dimension::language: {
      const auto* f = pick_fact(banks, rng, is_script_fact);
      b.condition(leaf(Condition::equal_to, d), {b.knowledge(*f)});
      break;
    }
    case Dimension::beginning_of_reply:
    case Dimension::ending_of_reply: {
      const auto k = *text_fact_node(b, rng);
      b.condition(leaf(rng.chance(0.5) ? Condition::equal_to : Condition::required, d), {k});
      break;
    }
    case Dimension::keyword_set: {
      const auto k = *text_fact_node(b, rng);
      b.condition(leaf(rng.chance(0.75) ? Condition::required : Condition::forbidden, d), {k});
      break;
    }
    case Dimension::sentence_type_mix:
      sentence_mix_recipe(b, rng);
      break;
    case Dimension::bold_word_set:
    case Dimension::unordered_list_items:
      collection_recipe(b, d, rng);
      break;
    case Dimension::per_paragraph_sentence_counts:
      sequence_recipe(b, rng);
      break;
    default:
      count_recipe(b, d, rng);
      break;
  }
  return b.finish();
}

}  // namespace

Erg draw_erg(const Banks& banks, Dimension d, Rng& rng) {
  if (!drawable(banks, d)) throw CapacityError("banks lack the facts needed for " + std::string(to_string(d)));
  // A literal from one node can coincide with another fact's answer; redraw.
  Erg erg = draw_once(banks, d, rng);
  for (int attempt = 0; attempt < 32 && find_leak(draft_constraint(erg, banks), erg, banks); ++attempt) {
    erg = draw_once(banks, d, rng);
  }
  return erg;
}

std::string draft_constraint(const Erg& erg, const Banks& banks) {
  std::vector<std::string> parts;
  for (const auto& id : erg.sinks()) parts.push_back(clause(erg, banks, *erg.find(id)));
  std::string text = join_or(parts, "and");
  if (!text.empty()) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  return text + ".";
}

std::optional<std::string> find_leak(std::string_view text, const Erg& erg, const Banks& banks) {
  const std::string hay = lower(text);
  for (const auto& n : erg.nodes) {
    const auto* k = std::get_if<KnowledgePayload>(&n.payload);
    if (!k) continue;
    const auto* fact = banks.find_fact(k->fact_id);
    if (!fact) continue;
    const std::string question = lower(fact->question);
    const std::string answer = lower(fact->answer_text());
    for (auto pos = hay.find(question); pos != std::string::npos; pos = hay.find(question, pos + 1)) {
      const std::size_t before = pos >= kLeakWindow ? pos - kLeakWindow : 0;
      const std::size_t after = pos + question.size();
      const std::string left = hay.substr(before, pos - before);
      const std::string right = hay.substr(after, kLeakWindow);
      if (contains_bounded(left, answer, fact->is_numeric()) || contains_bounded(right, answer, fact->is_numeric())) {
        return fact->id;
      }
    }
  }
  return std::nullopt;
}

}  // namespace ergkit
