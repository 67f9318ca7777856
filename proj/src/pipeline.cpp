#include "ergkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "ergkit/error.hpp"

namespace ergkit {

namespace {

struct Drawn {
  std::vector<ConstraintItem> items;
  std::vector<Predicate> predicates;
  PlannedPair pair;
};

std::optional<Drawn> draw_instruction(const Banks& banks, Gateway& generator, Gateway& judge,
                                      const SynthOptions& options, std::size_t level, std::uint64_t seed) {
  Rng rng(seed);
  auto dims = drawable_dimensions(banks);
  if (dims.size() < level) throw CapacityError("banks support fewer dimensions than the requested level");
  rng.shuffle(dims);

  const std::size_t wanted = std::min(dims.size(), level + options.spare_candidates);
  std::vector<ConstraintItem> candidates;
  for (const auto d : dims) {
    if (candidates.size() == wanted) break;
    const auto ec = evaluate_graph(draw_erg(banks, d, rng), banks);
    ConstraintItem item;
    try {
      item = render_constraint_nl(ec, banks, generator);
    } catch (const LeakageError&) {
      continue;
    }
    if (!filter_consistency(item.text, judge).accept) continue;
    candidates.push_back(std::move(item));
  }
  if (candidates.size() < level) return std::nullopt;

  std::vector<std::string> texts;
  for (const auto& c : candidates) texts.push_back(c.text);
  const auto picked = select_compatible(texts, level, judge);
  if (picked.size() < level) return std::nullopt;

  Drawn out;
  for (auto i : picked) out.items.push_back(candidates[i]);
  for (const auto& c : out.items) out.predicates.push_back(c.predicate);
  auto pair = plan_pair(out.predicates, mix_seed(seed, 1), options.planner);
  if (!pair) return std::nullopt;
  out.pair = std::move(*pair);
  return out;
}

// Splits items into `turns` non-empty contiguous chunks at even positions, so
// the dialogue keeps the items' order.
ConstraintSchedule contiguous_schedule(const std::vector<ConstraintItem>& items, std::size_t turns, Rng& rng) {
  std::vector<std::size_t> cuts;
  for (std::size_t i = 1; i < items.size(); ++i) cuts.push_back(i);
  rng.shuffle(cuts);
  cuts.resize(turns - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(items.size());
  ConstraintSchedule schedule;
  std::size_t begin = 0;
  for (std::size_t t = 0; t < cuts.size(); ++t) {
    schedule[2 * t] = {items.begin() + static_cast<std::ptrdiff_t>(begin),
                       items.begin() + static_cast<std::ptrdiff_t>(cuts[t])};
    begin = cuts[t];
  }
  return schedule;
}

}  // namespace

void validate(const SynthOptions& o) {
  for (int l : o.levels) {
    if (l < 1 || l > 5) throw ArgumentError("level " + std::to_string(l) + " is outside 1..5");
  }
  auto ratio = [](double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) throw ArgumentError(std::string(name) + " must lie in [0, 1]");
  };
  ratio(o.multi_turn_ratio, "multi_turn_ratio");
  ratio(o.adversarial_ratio, "adversarial_ratio");
  if (o.workers == 0) throw ArgumentError("workers must be at least 1");
  if (o.min_turns == 0 || o.max_turns < o.min_turns) throw ArgumentError("turn range must satisfy 1 <= min <= max");
  if (o.max_attempts == 0) throw ArgumentError("max_attempts must be at least 1");
}

DatasetRecord synthesize_record(const Banks& banks, Gateway& generator, Gateway& judge, const SynthOptions& options,
                                int level, std::size_t index) {
  validate(options);
  const auto record_seed = mix_seed(options.seed, static_cast<std::uint64_t>(level) * 1'000'003u + index);
  Rng rng(record_seed);
  const auto queries = options.queries.empty() ? default_queries() : options.queries;
  if (queries.empty()) throw ArgumentError("no user queries to draw from");

  DatasetRecord r;
  r.level = level;
  r.id = "L" + std::to_string(level) + "-" + std::to_string(index);
  r.query = rng.pick(queries);
  const bool multi = rng.chance(options.multi_turn_ratio);
  const bool accumulated = rng.chance(0.5);
  const bool adversarial = rng.chance(options.adversarial_ratio);
  const auto categories = adversarial_categories();
  const auto category = categories[rng.index(categories.size())];
  const auto turns = static_cast<std::size_t>(
      rng.between(static_cast<std::int64_t>(options.min_turns), static_cast<std::int64_t>(options.max_turns)));

  std::optional<Drawn> drawn;
  for (std::size_t attempt = 0; attempt < options.max_attempts && !drawn; ++attempt) {
    drawn = draw_instruction(banks, generator, judge, options, static_cast<std::size_t>(level),
                             mix_seed(record_seed, 100 + attempt));
  }
  if (!drawn) throw CapacityError("no plannable instruction found for " + r.id);

  if (!multi) {
    r.kind = RecordKind::single_turn;
    r.instruction = compose_single_turn(drawn->items, r.query);
  } else {
    r.kind = RecordKind::multi_turn;
    Dialogue d;
    if (accumulated) {
      const auto chunks = std::min<std::size_t>(turns, drawn->items.size());
      d = build_accumulated_dialogue(contiguous_schedule(drawn->items, chunks, rng), r.query, generator);
    } else {
      d = build_system_dialogue(drawn->items, r.query, turns, generator);
    }
    if (adversarial) {
      d = inject_adversarial(std::move(d), category, r.query, generator);
    } else {
      d.turns.pop_back();  // the final assistant turn is what the response replaces
    }
    r.dialogue = std::move(d);
  }

  r.canonical_response = drawn->pair.canonical;
  r.mutated_response = drawn->pair.mutated;
  r.broken_constraint = drawn->pair.broken;
  const auto& items = r.constraints();
  r.cot = {expand_original(items, r.query), expand_structured(items, r.query), expand_erg_cot(items, r.query)};
  r.provenance = {options.seed,
                  record_seed,
                  banks.version(),
                  std::string(kTemplateVersion),
                  std::string(kMeasurementRulesVersion),
                  generator.mode(),
                  generator.model(),
                  judge.model()};
  return r;
}

std::vector<DatasetRecord> synthesize(const Banks& banks, Gateway& generator, Gateway& judge,
                                      const SynthOptions& options) {
  validate(options);
  std::vector<std::pair<int, std::size_t>> jobs;
  for (int level : options.levels) {
    for (std::size_t i = 0; i < options.count; ++i) jobs.push_back({level, i});
  }
  std::vector<std::optional<DatasetRecord>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size() && !failed; j = next++) {
      try {
        results[j] = synthesize_record(banks, generator, judge, options, jobs[j].first, jobs[j].second);
      } catch (...) {
        errors[j] = std::current_exception();
        failed = true;
      }
    }
  };
  const auto n = std::min(options.workers, std::max<std::size_t>(jobs.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<DatasetRecord> out;
  out.reserve(jobs.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace ergkit
