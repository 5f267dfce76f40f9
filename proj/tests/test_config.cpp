#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "lavatube/config.hpp"

using namespace lavatube;

TEST_CASE("minimal config keeps every default") {
  const MissionConfig c = parse_config("seed = 42\n");
  CHECK(c.seed == 42);
  const MissionConfig d;
  CHECK(c.budget_s == d.budget_s);
  CHECK(c.v_max == d.v_max);
  CHECK(c.loop_hz == 20.0);
  CHECK(c.nmpc.N == d.nmpc.N);
  CHECK(c.nmpc.W_x == d.nmpc.W_x);
  CHECK(c.model.g == 3.71);

  const std::string echo = echo_config(c);
  for (const std::string& k : config_keys()) CHECK(("\n" + echo).find("\n" + k + " = ") != std::string::npos);
}

TEST_CASE("keys are unique") {
  const auto keys = config_keys();
  CHECK(std::set<std::string>(keys.begin(), keys.end()).size() == keys.size());
}

TEST_CASE("comments, spacing and lists") {
  const MissionConfig c = parse_config(
      "# header\n"
      "  budget_s=120   # two minutes\n"
      "\n"
      "nmpc.W_u = 1, 2.5 ,3\n"
      "nmpc.u_max = 7, 0.3, 0.3\n"
      "world.file = some/path.txt\n");
  CHECK(c.budget_s == 120.0);
  CHECK(c.nmpc.W_u == std::array<double, 3>{1.0, 2.5, 3.0});
  CHECK(c.nmpc.u_max.T == 7.0);
  CHECK(c.nmpc.u_max.phi_ref == 0.3);
  CHECK(c.world_file == "some/path.txt");
}

TEST_CASE("errors name the key") {
  CHECK_THROWS_WITH_AS(parse_config("budget_s = -1\n"), doctest::Contains("budget_s"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("nmpc.bogus = 1\n"), doctest::Contains("nmpc.bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("v_max = fast\n"), doctest::Contains("v_max"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("nmpc.N = 2.5\n"), doctest::Contains("nmpc.N"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("nmpc.W_u = 1,2\n"), doctest::Contains("nmpc.W_u"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("seed = 1\nseed = 2\n"), doctest::Contains("seed"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("apf.r_f = 0\n"), doctest::Contains("apf.r_f"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("world.roughness = 0.7\n"), doctest::Contains("world.roughness"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("map.resolution = 0\n"), doctest::Contains("map.resolution"), ConfigError);
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/cfg.txt"), ConfigError);
}

TEST_CASE("echo round trip") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    MissionConfig c;
    c.seed = rng();
    c.budget_s = 100.0 * u(rng);
    c.v_max = u(rng);
    c.apf.step_gain = u(rng) / 3.0;
    c.nmpc.W_x[3] = u(rng);
    c.world.length = 10.0 * u(rng);
    c.sensor.noise_sigma = u(rng) / 100.0;
    const std::string echo = echo_config(c);
    const MissionConfig back = parse_config(echo);
    CHECK(echo_config(back) == echo);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(back.apf.step_gain == c.apf.step_gain);
    CHECK(back.seed == c.seed);
  }
}

TEST_CASE("hash tracks content") {
  MissionConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.nmpc.W_du[1] = 21.0;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("load from a file") {
  const auto path = std::filesystem::temp_directory_path() / "lavatube_cfg_test.txt";
  {
    std::ofstream out(path);
    out << "seed = 9\nv_max = 0.8\n";
  }
  const MissionConfig c = load_config(path);
  CHECK(c.seed == 9);
  CHECK(c.v_max == 0.8);
  std::filesystem::remove(path);
}
