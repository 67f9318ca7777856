#include "ergkit/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>

#include <nlohmann/json.hpp>

#include "ergkit/dataset.hpp"
#include "ergkit/error.hpp"

extern char** environ;

namespace ergkit {

using json = nlohmann::json;

namespace {

std::string where_of(const std::string& key, const std::string& source) { return key + " (" + source + ")"; }

std::uint64_t to_unsigned(const std::string& text, const std::string& where) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(where + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

double to_double(const std::string& text, const std::string& where) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  }
  return v;
}

Rational to_rational(const std::string& text, const std::string& where) {
  try {
    return Rational::parse(text);
  } catch (const Error&) {
    throw ConfigError(where + ": expected a rational like 0.2 or 1/5, got '" + text + "'");
  }
}

enum class Kind { text, unsigned_int, real, rational, levels };

struct Key {
  std::string name;
  Kind kind;
  std::string help;
  std::function<void(Config&, const std::string&, const std::string&)> apply;
};

template <class F>
Key key(std::string name, Kind kind, std::string help, F f) {
  return {std::move(name), kind, std::move(help), f};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      key("gateway", Kind::text, "mock, live, record or replay",
          [](Config& c, const std::string& v, const std::string& w) {
            if (v != "mock" && v != "live" && v != "record" && v != "replay") {
              throw ConfigError(w + ": expected mock, live, record or replay, got '" + v + "'");
            }
            c.gateway = v;
          }),
      key("model", Kind::text, "generator model id", [](Config& c, const std::string& v, const std::string&) { c.model = v; }),
      key("judge_model", Kind::text, "judge model id",
          [](Config& c, const std::string& v, const std::string&) { c.judge_model = v; }),
      key("base_url", Kind::text, "chat-completions endpoint base",
          [](Config& c, const std::string& v, const std::string&) { c.base_url = v; }),
      key("cassette", Kind::text, "cassette file for record/replay",
          [](Config& c, const std::string& v, const std::string&) { c.cassette = v; }),
      key("banks", Kind::text, "bank file (empty: built-in)",
          [](Config& c, const std::string& v, const std::string&) { c.banks = v; }),
      key("requests_per_second", Kind::real, "live request pacing, 0 for none",
          [](Config& c, const std::string& v, const std::string& w) { c.requests_per_second = to_double(v, w); }),
      key("max_retries", Kind::unsigned_int, "live retries on transient failures",
          [](Config& c, const std::string& v, const std::string& w) { c.max_retries = to_unsigned(v, w); }),
      key("seed", Kind::unsigned_int, "synthesis seed",
          [](Config& c, const std::string& v, const std::string& w) { c.seed = to_unsigned(v, w); }),
      key("count", Kind::unsigned_int, "records per level",
          [](Config& c, const std::string& v, const std::string& w) { c.count = to_unsigned(v, w); }),
      key("levels", Kind::levels, "levels such as 1..5 or 1,3",
          [](Config& c, const std::string& v, const std::string& w) {
            try {
              c.levels = parse_levels(v);
            } catch (const ConfigError& e) {
              throw ConfigError(w + ": " + e.what());
            }
          }),
      key("workers", Kind::unsigned_int, "concurrent synthesis jobs",
          [](Config& c, const std::string& v, const std::string& w) { c.workers = to_unsigned(v, w); }),
      key("multi_turn_ratio", Kind::real, "share of multi-turn records",
          [](Config& c, const std::string& v, const std::string& w) { c.multi_turn_ratio = to_double(v, w); }),
      key("adversarial_ratio", Kind::real, "share of multi-turn records with an adversarial last turn",
          [](Config& c, const std::string& v, const std::string& w) { c.adversarial_ratio = to_double(v, w); }),
      key("min_turns", Kind::unsigned_int, "fewest user turns per dialogue",
          [](Config& c, const std::string& v, const std::string& w) { c.min_turns = to_unsigned(v, w); }),
      key("max_turns", Kind::unsigned_int, "most user turns per dialogue",
          [](Config& c, const std::string& v, const std::string& w) { c.max_turns = to_unsigned(v, w); }),
      key("alpha", Kind::rational, "thinking reward scale",
          [](Config& c, const std::string& v, const std::string& w) { c.think.alpha = to_rational(v, w); }),
      key("w_l", Kind::rational, "logicality weight",
          [](Config& c, const std::string& v, const std::string& w) { c.think.w_l = to_rational(v, w); }),
      key("w_c", Kind::rational, "correctness weight",
          [](Config& c, const std::string& v, const std::string& w) { c.think.w_c = to_rational(v, w); }),
      key("eps_clip", Kind::real, "GRPO clip range",
          [](Config& c, const std::string& v, const std::string& w) { c.grpo.eps_clip = to_double(v, w); }),
      key("beta", Kind::real, "GRPO KL weight",
          [](Config& c, const std::string& v, const std::string& w) { c.grpo.beta = to_double(v, w); }),
      key("eps_var", Kind::real, "GRPO variance floor",
          [](Config& c, const std::string& v, const std::string& w) { c.grpo.eps_var = to_double(v, w); }),
  };
  return table;
}

const Key& find_key(const std::string& name, const std::string& source) {
  for (const auto& k : keys()) {
    if (k.name == name) return k;
  }
  if (name == "api_key") {
    throw ConfigError("credentials are read only from " + std::string(kApiKeyVariable) + ", not from " + source);
  }
  throw ConfigError("unknown setting '" + name + "' in " + source);
}

// File values keep their JSON type so a string where a number belongs is caught.
std::string file_value(const Key& k, const json& v, const std::string& where) {
  switch (k.kind) {
    case Kind::text:
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
      return v.get<std::string>();
    case Kind::unsigned_int:
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(where + ": expected a non-negative integer");
      }
      return std::to_string(v.get<std::uint64_t>());
    case Kind::real:
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
      return v.dump();
    case Kind::rational:
      if (v.is_number()) return v.dump();
      if (v.is_string()) return v.get<std::string>();
      throw ConfigError(where + ": expected a number or a fraction string");
    case Kind::levels:
      if (v.is_string()) return v.get<std::string>();
      if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
          if (!e.is_number_integer()) throw ConfigError(where + ": levels must be integers");
          out += (out.empty() ? "" : ",") + std::to_string(e.get<std::int64_t>());
        }
        return out;
      }
      throw ConfigError(where + ": expected a level list");
  }
  return {};
}

std::string env_name(const std::string& key) {
  std::string out(kEnvPrefix);
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const auto list = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : keys()) out.push_back({k.name, k.help});
    return out;
  }();
  return list;
}

std::vector<int> parse_levels(std::string_view text) {
  const std::string s(text);
  auto level = [&](const std::string& part) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty() || v < 1 || v > 5) {
      throw ConfigError("level '" + part + "' is not an integer in 1..5");
    }
    return v;
  };
  std::vector<int> out;
  if (auto dots = s.find(".."); dots != std::string::npos) {
    const int lo = level(s.substr(0, dots));
    const int hi = level(s.substr(dots + 2));
    if (hi < lo) throw ConfigError("level range '" + s + "' is empty");
    for (int l = lo; l <= hi; ++l) out.push_back(l);
    return out;
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    out.push_back(level(s.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Settings process_environment() {
  Settings out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    if (!entry.starts_with(kEnvPrefix)) continue;
    auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return out;
}

Config load_config(const std::optional<std::filesystem::path>& file, const Settings& environment,
                   const Settings& flags) {
  Config c;
  if (file && std::filesystem::exists(*file)) {
    const auto text = read_text_file(*file);
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw ConfigError("config file '" + file->string() + "' is not a JSON object");
    }
    const std::string source = "config file '" + file->string() + "'";
    for (const auto& [name, value] : doc.items()) {
      const auto& k = find_key(name, source);
      const auto w = where_of(name, source);
      k.apply(c, file_value(k, value, w), w);
    }
  }
  for (const auto& k : keys()) {
    if (auto it = environment.find(env_name(k.name)); it != environment.end()) {
      k.apply(c, it->second, where_of(k.name, "environment " + it->first));
    }
  }
  for (const auto& [name, value] : flags) {
    const auto& k = find_key(name, "command-line flags");
    k.apply(c, value, where_of(name, "flag --" + name));
  }
  if (auto it = environment.find(std::string(kApiKeyVariable)); it != environment.end() && !it->second.empty()) {
    c.api_key = it->second;
  }
  try {
    validate(c.think);
    validate(c.grpo);
    validate(synth_options(c));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

SynthOptions synth_options(const Config& c) {
  SynthOptions o;
  o.levels = c.levels;
  o.count = c.count;
  o.seed = c.seed;
  o.workers = c.workers;
  o.multi_turn_ratio = c.multi_turn_ratio;
  o.adversarial_ratio = c.adversarial_ratio;
  o.min_turns = c.min_turns;
  o.max_turns = c.max_turns;
  return o;
}

}  // namespace ergkit
