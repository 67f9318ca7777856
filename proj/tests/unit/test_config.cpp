#include <doctest.h>

#include <filesystem>

#include <unistd.h>

#include "ergkit/config.hpp"
#include "ergkit/dataset.hpp"
#include "ergkit/error.hpp"

using namespace ergkit;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("ergkit_config_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    write_text_file(dir / name, text);
    return dir / name;
  }
};

}  // namespace

TEST_CASE("level lists") {
  CHECK(parse_levels("1..5") == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(parse_levels("2..2") == std::vector<int>{2});
  CHECK(parse_levels("3") == std::vector<int>{3});
  CHECK(parse_levels("1,3,5") == std::vector<int>{1, 3, 5});
  for (auto bad : {"", "0", "6", "4..2", "1..", "a", "1,,2", "1,"}) {
    CHECK_THROWS_AS(parse_levels(bad), ConfigError);
  }
}

TEST_CASE("defaults without a file") {
  const auto c = load_config(std::nullopt, {});
  CHECK(c.gateway == "mock");
  CHECK(c.levels == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(c.grpo.eps_var == 1e-8);
  CHECK(!c.api_key);
  Scratch s;
  CHECK(load_config(s.dir / "absent.json", {}).count == 10);
}

TEST_CASE("precedence is file, then environment, then flags") {
  Scratch s;
  const auto file = s.write("c.json", R"({"seed": 1, "count": 2, "workers": 3, "levels": [1, 2], "w_l": "1/2",
                                          "w_c": 0.5, "gateway": "replay"})");
  const auto from_file = load_config(file, {});
  CHECK(from_file.seed == 1);
  CHECK(from_file.levels == std::vector<int>{1, 2});
  CHECK(from_file.think.w_l == Rational(1, 2));
  CHECK(from_file.gateway == "replay");

  const Settings env = {{"ERGKIT_COUNT", "20"}, {"ERGKIT_WORKERS", "5"}, {"ERGKIT_UNRELATED", "x"}};
  const auto with_env = load_config(file, env);
  CHECK(with_env.seed == 1);
  CHECK(with_env.count == 20);
  CHECK(with_env.workers == 5);

  const auto with_flags = load_config(file, env, {{"workers", "7"}, {"levels", "3..4"}});
  CHECK(with_flags.seed == 1);
  CHECK(with_flags.count == 20);
  CHECK(with_flags.workers == 7);
  CHECK(with_flags.levels == std::vector<int>{3, 4});

  const auto o = synth_options(with_flags);
  CHECK(o.workers == 7);
  CHECK(o.count == 20);
}

TEST_CASE("bad configuration") {
  Scratch s;
  CHECK_THROWS_AS(load_config(s.write("a.json", "[1]"), {}), ConfigError);
  CHECK_THROWS_AS(load_config(s.write("b.json", R"({"seed": "1"})"), {}), ConfigError);
  CHECK_THROWS_AS(load_config(s.write("c.json", R"({"seed": -1})"), {}), ConfigError);
  CHECK_THROWS_AS(load_config(s.write("d.json", R"({"nope": 1})"), {}), ConfigError);
  CHECK_THROWS_AS(load_config(s.write("e.json", R"({"gateway": "ftp"})"), {}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {{"ERGKIT_SEED", "x"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"count", "1.5"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"eps_var", "0"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"w_l", "0.9"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"workers", "0"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"multi_turn_ratio", "1.5"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"min_turns", "4"}}), ConfigError);
}

TEST_CASE("the api key comes only from the environment") {
  Scratch s;
  const auto secret = std::string("sk-never-printed");
  try {
    load_config(s.write("k.json", R"({"api_key": "sk-never-printed"})"), {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(secret) == std::string::npos);
  }
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"api_key", secret}}), ConfigError);
  const auto c = load_config(std::nullopt, {{std::string(kApiKeyVariable), secret}});
  CHECK(c.api_key == secret);
}

TEST_CASE("key table") {
  const auto& keys = config_keys();
  CHECK(keys.size() >= 20);
  for (const auto& [name, help] : keys) {
    CHECK(!name.empty());
    CHECK(!help.empty());
    CHECK(name != "api_key");
  }
}
