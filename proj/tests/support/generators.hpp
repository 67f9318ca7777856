#pragma once

// Seeded generators for property tests.

#include <string>
#include <vector>

#include "ergkit/graph.hpp"
#include "ergkit/random.hpp"
#include "ergkit/verifier.hpp"

namespace ergkit::gen {

inline const std::vector<std::string>& words() {
  static const std::vector<std::string> w = {"alpha", "Beta", "gamma ray", "delta", "Paris", "ok", "zeta",
                                             "scope", "Goals", "Func reqs", "Boundaries", "x"};
  return w;
}

inline const std::vector<std::string>& openers() {
  static const std::vector<std::string> w = {"Sure thing", "sure", "Surely not", "Hello there", "hello",
                                             "In short", "Indeed", "Paris is big"};
  return w;
}

inline const std::vector<std::string>& closers() {
  static const std::vector<std::string> w = {"Thank you.", "thank you!", "Bye \"now\"", "that is all)",
                                             "see you", "Paris.", "in Paris", "all set"};
  return w;
}

inline Rational number(Rng& rng) {
  if (rng.chance(0.1)) return Rational(rng.between(1, 29), 2);
  return Rational(rng.between(0, 14));
}

inline PropertyList numeric_properties(Rng& rng) {
  std::vector<Property> all = {Property::positive, Property::even, Property::odd,
                               Property::prime,    Property::composite, Property::square};
  rng.shuffle(all);
  all.resize(1 + rng.index(3));
  return {all};
}

inline TextList texts(Rng& rng, const std::vector<std::string>& pool) {
  TextList t;
  const std::size_t n = 1 + rng.index(3);
  for (std::size_t i = 0; i < n; ++i) t.items.push_back(rng.pick(pool));
  return t;
}

inline const std::vector<std::string>& type_names() {
  static const std::vector<std::string> w = {"declarative", "interrogative", "exclamatory", "other"};
  return w;
}

inline std::vector<Dimension> count_dimensions() {
  std::vector<Dimension> out;
  for (const auto& k : dimension_catalogue()) {
    if (k.measurement == MeasurementKind::count) out.push_back(k.id);
  }
  return out;
}

inline Predicate leaf(Rng& rng) {
  Predicate p;
  const auto& dims = dimension_catalogue();
  const Dimension d = dims[rng.index(dims.size())].id;
  p.dimension = d;
  switch (measurement_of(d)) {
    case MeasurementKind::count: {
      const std::vector<Condition> cs = {Condition::no_more_than, Condition::no_less_than, Condition::maximum_value,
                                         Condition::minimum_value, Condition::equal_to,    Condition::not_equal_to,
                                         Condition::interval,      Condition::required,    Condition::forbidden,
                                         Condition::positive_integer_multiple_of};
      p.condition = rng.pick(cs);
      if (p.condition == Condition::interval) {
        p.parameters = {number(rng), number(rng) + Rational(rng.between(-2, 8))};
      } else if (p.condition == Condition::required || p.condition == Condition::forbidden) {
        p.parameters = {numeric_properties(rng)};
      } else if (p.condition == Condition::positive_integer_multiple_of) {
        if (rng.chance(0.5)) {
          p.parameters = {Rational(rng.between(-1, 5))};
        } else {
          auto cds = count_dimensions();
          std::erase(cds, Dimension::keyword_count);
          p.parameters = {rng.pick(cds)};
        }
      } else {
        p.parameters = {number(rng)};
      }
      if (d == Dimension::keyword_count) p.terms = texts(rng, words()).items;
      break;
    }
    case MeasurementKind::sequence: {
      const std::vector<Condition> cs = {Condition::maximum_value, Condition::minimum_value,
                                         Condition::consecutive_fibonacci_terms, Condition::required,
                                         Condition::forbidden};
      p.condition = rng.pick(cs);
      if (p.condition == Condition::maximum_value || p.condition == Condition::minimum_value) {
        p.parameters = {number(rng)};
      } else if (p.condition != Condition::consecutive_fibonacci_terms) {
        auto props = numeric_properties(rng);
        if (rng.chance(0.4)) props.items.push_back(Property::distinct);
        p.parameters = {props};
      }
      break;
    }
    case MeasurementKind::set: {
      const bool ordered = d == Dimension::bold_word_set || d == Dimension::unordered_list_items;
      if (ordered && rng.chance(0.3)) {
        p.condition = Condition::strictly_ascending_by_length;
        break;
      }
      p.condition = rng.chance(0.5) ? Condition::required : Condition::forbidden;
      if (d != Dimension::keyword_set && rng.chance(0.35)) {
        p.parameters = {PropertyList{{Property::distinct}}};
      } else {
        p.parameters = {texts(rng, d == Dimension::sentence_type_mix ? type_names() : words())};
      }
      break;
    }
    case MeasurementKind::text: {
      const std::vector<std::string> langs = {"latin", "Cyrillic", "cjk", "unknown"};
      const auto& pool = d == Dimension::language           ? langs
                         : d == Dimension::beginning_of_reply ? openers()
                                                              : closers();
      std::vector<std::string> cut;
      for (const auto& s : pool) {
        cut.push_back(s);
        auto sp = s.find(' ');
        if (sp != std::string::npos) cut.push_back(d == Dimension::ending_of_reply ? s.substr(sp + 1) : s.substr(0, sp));
      }
      const std::vector<Condition> cs = {Condition::equal_to, Condition::not_equal_to, Condition::required,
                                         Condition::forbidden};
      p.condition = rng.pick(cs);
      if (p.condition == Condition::equal_to || p.condition == Condition::not_equal_to) {
        p.parameters = {rng.pick(cut)};
      } else {
        p.parameters = {texts(rng, cut)};
      }
      break;
    }
  }
  return p;
}

inline Predicate predicate(Rng& rng, int depth = 2) {
  if (depth > 0 && rng.chance(0.3)) {
    Predicate p;
    p.condition = rng.chance(0.5) ? Condition::logical_and : Condition::logical_or;
    const std::size_t n = 1 + rng.index(3);
    for (std::size_t i = 0; i < n; ++i) p.children.push_back(predicate(rng, depth - 1));
    return p;
  }
  return leaf(rng);
}

inline std::vector<std::string> picks(Rng& rng, std::size_t max) {
  std::vector<std::string> out;
  const std::size_t n = rng.index(max + 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rng.pick(words()));
  return out;
}

inline std::size_t small(Rng& rng) { return static_cast<std::size_t>(rng.between(0, 14)); }

/// Measurements that need not come from any real text.
inline ResponseMeasurements measurements(Rng& rng) {
  ResponseMeasurements m;
  m.paragraph_count = small(rng);
  const std::size_t ns = rng.index(7);
  for (std::size_t i = 0; i < ns; ++i) {
    SentenceRecord s;
    s.text = rng.pick(words());
    s.type = static_cast<SentenceType>(rng.index(4));
    m.sentences.push_back(s);
  }
  if (rng.chance(0.3)) {
    const std::vector<std::int64_t> fib = {0, 1, 1, 2, 3, 5, 8, 13};
    const std::size_t start = rng.index(5);
    const std::size_t len = 1 + rng.index(3);
    for (std::size_t i = start; i < start + len; ++i) m.per_paragraph_sentence_counts.push_back(fib[i]);
  } else {
    const std::size_t np = rng.index(5);
    for (std::size_t i = 0; i < np; ++i) m.per_paragraph_sentence_counts.push_back(rng.between(0, 9));
  }
  m.punctuation_count = small(rng);
  m.character_count = rng.chance(0.5) ? small(rng) : static_cast<std::size_t>(rng.between(0, 400));
  m.word_count = small(rng);
  m.bold_spans = picks(rng, 5);
  const std::size_t blocks = rng.index(3);
  for (std::size_t i = 0; i < blocks; ++i) {
    ListBlock b;
    b.items = picks(rng, 4);
    b.top_level = rng.chance(0.7);
    m.list_blocks.push_back(b);
  }
  m.numbered_list_item_count = small(rng);
  m.quotation_count = small(rng);
  m.bracketed_terms = picks(rng, 4);
  m.line_count = small(rng);
  m.special_symbol_count = small(rng);
  const std::vector<std::string> langs = {"latin", "cyrillic", "cjk", "unknown"};
  m.language = rng.pick(langs);
  m.leading_text = rng.pick(openers());
  if (rng.chance(0.3)) m.leading_text += rng.chance(0.5) ? " and more" : "s";
  m.trailing_text = rng.pick(closers());
  if (rng.chance(0.3)) m.trailing_text = "oh " + m.trailing_text;
  for (const auto& w : words()) m.keyword_counts[w] = rng.between(0, 3);
  return m;
}

// ---------------------------------------------------------------------------
// Random reasoning graphs
// ---------------------------------------------------------------------------

/// Knowledge nodes over numeric facts, arithmetic on top, one or two count
/// conditions and sometimes a conjunction. Ids and edges are shuffled so
/// declaration order says nothing about evaluation order.
inline Erg dag(const Banks& banks, Rng& rng) {
  std::vector<std::string> facts;
  for (const auto& f : banks.facts()) {
    if (f.is_numeric()) facts.push_back(f.id);
  }
  std::vector<std::string> ids = {"A", "B", "C", "D", "E", "F", "G", "H"};
  rng.shuffle(ids);
  std::size_t next_id = 0;
  auto fresh = [&] { return ids[next_id++]; };

  Erg g;
  std::vector<std::string> values;
  const std::size_t total = 3 + rng.index(6);  // 3..8
  const bool combine = total >= 4 && rng.chance(0.4);
  const std::size_t leaves = combine ? 2 : 1 + rng.index(2);
  const std::size_t conditions = leaves + (combine ? 1 : 0);
  const std::size_t value_nodes = total - conditions;
  if (value_nodes < 1) return dag(banks, rng);
  const std::size_t knowledge = 1 + rng.index(std::min<std::size_t>(value_nodes, 3));

  for (std::size_t i = 0; i < knowledge; ++i) {
    const auto id = fresh();
    g.nodes.push_back({id, KnowledgePayload{rng.pick(facts)}, "fact " + id});
    values.push_back(id);
  }
  const std::vector<Operation> ops = {Operation::addition, Operation::subtraction, Operation::multiplication,
                                      Operation::division};
  for (std::size_t i = knowledge; i < value_nodes; ++i) {
    const auto id = fresh();
    MathPayload m;
    m.op = rng.pick(ops);
    const std::size_t parents = m.op == Operation::division ? 1 : 1 + rng.index(std::min<std::size_t>(values.size(), 2));
    std::vector<std::string> chosen = values;
    rng.shuffle(chosen);
    chosen.resize(parents);
    for (const auto& p : chosen) {
      g.edges.push_back({p, id});
      m.operands.push_back(std::nullopt);
    }
    if (m.op == Operation::division) {
      m.operands.push_back(Rational(rng.between(1, 4)));
    } else if (parents == 1 || rng.chance(0.3)) {
      m.operands.insert(m.operands.begin() + static_cast<std::ptrdiff_t>(rng.index(m.operands.size() + 1)),
                        Rational(rng.between(1, 5)));
    }
    g.nodes.push_back({id, m, "math " + id});
    values.push_back(id);
  }
  auto counts = count_dimensions();
  std::erase(counts, Dimension::keyword_count);
  std::vector<std::string> leaf_ids;
  for (std::size_t i = 0; i < leaves; ++i) {
    const auto id = fresh();
    ConditionPayload c;
    c.dimension = rng.pick(counts);
    const std::vector<Condition> cs = {Condition::interval, Condition::no_more_than, Condition::equal_to,
                                       Condition::not_equal_to, Condition::no_less_than};
    c.condition = rng.pick(cs);
    const std::size_t slots = kind_of(c.condition).arity();
    std::vector<std::string> feeds = values;
    rng.shuffle(feeds);
    for (std::size_t s = 0; s < slots; ++s) {
      if (s < feeds.size() && rng.chance(0.7)) {
        c.parameters.push_back(std::nullopt);
        g.edges.push_back({feeds[s], id});
      } else {
        c.parameters.push_back(Parameter{Rational(rng.between(0, 50))});
      }
    }
    g.nodes.push_back({id, c, "check " + id});
    leaf_ids.push_back(id);
  }
  if (combine) {
    const auto id = fresh();
    ConditionPayload c;
    c.condition = rng.chance(0.5) ? Condition::logical_and : Condition::logical_or;
    g.nodes.push_back({id, c, "combine " + id});
    for (const auto& l : leaf_ids) g.edges.push_back({l, id});
  }
  rng.shuffle(g.nodes);
  rng.shuffle(g.edges);
  return g;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline VerificationReport report(Rng& rng) {
  std::vector<bool> c, r;
  const std::size_t n = 1 + rng.index(5);
  const std::size_t m = rng.chance(0.3) ? rng.index(3) : 0;
  const double bias = rng.unit();
  for (std::size_t i = 0; i < n; ++i) c.push_back(rng.unit() < bias);
  for (std::size_t i = 0; i < m; ++i) r.push_back(rng.unit() < bias);
  return make_report(c, r, 1 + static_cast<int>(rng.index(5)));
}

}  // namespace ergkit::gen
