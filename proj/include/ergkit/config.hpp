#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ergkit/pipeline.hpp"
#include "ergkit/scoring.hpp"

namespace ergkit {

/// Only variables starting with this prefix are read; the key "foo_bar"
/// maps to ERGKIT_FOO_BAR.
inline constexpr std::string_view kEnvPrefix = "ERGKIT_";

struct Config {
  std::string gateway = "mock";  // mock | live | record | replay
  std::string model = "gpt-4.1-2025-04-14";
  std::string judge_model = "gpt-4.1-2025-04-14";
  std::string base_url = "https://api.openai.com/v1";
  std::string cassette;  // required by record and replay
  std::string banks;     // empty: built-in bank
  double requests_per_second = 0;  // 0: unpaced
  std::size_t max_retries = 3;

  std::uint64_t seed = 0;
  std::size_t count = 10;
  std::vector<int> levels{1, 2, 3, 4, 5};
  std::size_t workers = 4;
  double multi_turn_ratio = 0.3;
  double adversarial_ratio = 0.3;
  std::size_t min_turns = 1;
  std::size_t max_turns = 3;

  ThinkConfig think;
  SurrogateParams grpo;

  /// From kApiKeyVariable; never printed or written anywhere.
  std::optional<std::string> api_key;
};

using Settings = std::map<std::string, std::string>;

/// Every setting key with a one-line help text, in display order.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// Parses "1..5", "2", or "1,3,5". Throws ConfigError.
std::vector<int> parse_levels(std::string_view text);

/// Snapshot of the process environment (prefixed variables only).
Settings process_environment();

/// Precedence: flags > environment > file > defaults. A missing file means
/// defaults. Unknown keys, bad types and an api key in the file or flags
/// throw ConfigError.
Config load_config(const std::optional<std::filesystem::path>& file, const Settings& environment,
                   const Settings& flags = {});

SynthOptions synth_options(const Config& config);

}  // namespace ergkit
