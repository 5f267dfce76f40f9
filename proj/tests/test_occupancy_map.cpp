#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "lavatube/occupancy_map.hpp"
#include "support/oracles.hpp"

using namespace lavatube;

namespace {

std::map<VoxelKey, VoxelState> snapshot(const OccupancyMap& m, const IndexBox& box) {
  std::map<VoxelKey, VoxelState> out;
  for (std::size_t i = 0; i < box.volume(); ++i) {
    const VoxelKey k = box.unlinear(i);
    out[k] = m.state(k);
  }
  return out;
}

}  // namespace

TEST_CASE("update_node_probability") {
  CHECK(update_node_probability(0.5, 0.7, 0.5) == doctest::Approx(0.7).epsilon(1e-12));
  const double two = update_node_probability(0.5, 0.7, update_node_probability(0.5, 0.7, 0.5));
  const double l = 2.0 * std::log(7.0 / 3.0);
  CHECK(two == doctest::Approx(1.0 / (1.0 + std::exp(-l))).epsilon(1e-12));
  CHECK(two == doctest::Approx(0.8448).epsilon(1e-4));
  CHECK(update_node_probability(0.3, 0.3, 0.62) == doctest::Approx(0.62).epsilon(1e-12));
  CHECK_THROWS_AS(update_node_probability(0.5, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(update_node_probability(0.0, 0.7, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(update_node_probability(0.5, 0.7, 0.0), std::invalid_argument);
}

TEST_CASE("voxel state rule") {
  OccupancyMap m;
  CHECK(m.state({1, 2, 3}) == VoxelState::Unknown);
  CHECK_FALSE(m.probability({1, 2, 3}).has_value());
  m.update_voxel({1, 2, 3}, true);
  CHECK(m.state({1, 2, 3}) == VoxelState::Occupied);
  CHECK(*m.probability({1, 2, 3}) == doctest::Approx(0.7));
  m.update_voxel({4, 2, 3}, false);
  CHECK(m.state({4, 2, 3}) == VoxelState::Free);
  CHECK(*m.probability({4, 2, 3}) == doctest::Approx(0.4));
  CHECK(m.known_count() == 2);
  CHECK(m.explored_volume() == doctest::Approx(2 * 0.125));
}

TEST_CASE("hit/miss sequences follow the closed-form product") {
  OccupancyConfig cfg;
  cfg.clamp_min = 1e-9;
  cfg.clamp_max = 1.0 - 1e-9;
  OccupancyMap m(cfg);
  std::mt19937_64 rng(1);
  std::bernoulli_distribution coin(0.5);
  for (int v = 0; v < 300; ++v) {
    const VoxelKey k{v, 0, 0};
    double odds = 1.0;
    double prev_p = 0.5;
    for (int step = 0; step < 15; ++step) {
      const bool hit = coin(rng);
      const double pm = hit ? cfg.p_hit : cfg.p_miss;
      odds *= pm / (1.0 - pm);
      m.update_voxel(k, hit);
      const double p = *m.probability(k);
      CHECK(std::abs(p - odds / (1.0 + odds)) <= 1e-9);
      if (hit) CHECK(p >= prev_p);
      else CHECK(p <= prev_p);
      prev_p = p;
    }
  }
}

TEST_CASE("clamping keeps probabilities in range") {
  OccupancyMap m;
  const VoxelKey k{0, 0, 0};
  for (int i = 0; i < 50; ++i) m.update_voxel(k, true);
  CHECK(*m.probability(k) == doctest::Approx(0.97));
  for (int i = 0; i < 100; ++i) {
    m.update_voxel(k, false);
    CHECK(*m.probability(k) >= 0.12 - 1e-12);
  }
  CHECK(*m.probability(k) == doctest::Approx(0.12));
}

TEST_CASE("integrate_scan") {
  SUBCASE("empty cloud") {
    OccupancyMap m;
    CHECK(m.integrate_scan({}, {Vec3::Zero(), 0.0}).empty());
    CHECK(m.known_count() == 0);
  }
  SUBCASE("single point ahead") {
    OccupancyMap m;
    const Pose pose{Vec3(0.1, 0.2, 0.3), 0.0};
    PointCloud c;
    c.points.push_back(Vec3(3.0, 0.37, 0.21));
    const auto changed = m.integrate_scan(c, pose);
    const Vec3 end = pose.position + c.points[0];
    const auto pierced = oracle::pierced_voxels(pose.position, end, 0.5);
    const VoxelKey end_key = key_of(end, 0.5);
    REQUIRE(pierced.count(end_key) == 1);
    CHECK(m.state(end_key) == VoxelState::Occupied);
    for (const auto& k : pierced)
      if (k != end_key) CHECK(m.state(k) == VoxelState::Free);
    CHECK(m.known_count() == pierced.size());
    CHECK(changed.size() == pierced.size());
    CHECK(m.explored_volume() == doctest::Approx(pierced.size() * 0.125));
  }
  SUBCASE("yaw rotates points into the world") {
    OccupancyMap m;
    PointCloud c;
    c.points.push_back(Vec3(2.0, 0.0, 0.0));
    m.integrate_scan(c, {Vec3(0.25, 0.25, 0.25), std::acos(-1.0) / 2});
    CHECK(m.state(key_of(Vec3(0.25, 2.25, 0.25), 0.5)) == VoxelState::Occupied);
  }
  SUBCASE("hit wins over a miss in the same scan") {
    OccupancyMap m;
    PointCloud c;
    c.points.push_back(Vec3(1.0, 0.0, 0.0));
    c.points.push_back(Vec3(3.0, 0.0, 0.0));
    m.integrate_scan(c, {Vec3(0.25, 0.25, 0.25), 0.0});
    CHECK(m.state(key_of(Vec3(1.25, 0.25, 0.25), 0.5)) == VoxelState::Occupied);
    CHECK(*m.probability(key_of(Vec3(1.25, 0.25, 0.25), 0.5)) == doctest::Approx(0.7));
  }
  SUBCASE("truncated rays carve up to the range limit only") {
    OccupancyConfig cfg;
    cfg.max_integration_range = 2.0;
    OccupancyMap m(cfg);
    PointCloud c;
    c.points.push_back(Vec3(5.0, 0.0, 0.0));
    m.integrate_scan(c, {Vec3(0.25, 0.25, 0.25), 0.0});
    CHECK(m.state(key_of(Vec3(2.0, 0.25, 0.25), 0.5)) == VoxelState::Free);
    CHECK(m.state(key_of(Vec3(3.0, 0.25, 0.25), 0.5)) == VoxelState::Unknown);
    CHECK(m.state(key_of(Vec3(5.25, 0.25, 0.25), 0.5)) == VoxelState::Unknown);
  }
  SUBCASE("a clamped scan produces no flips") {
    OccupancyMap m;
    PointCloud c;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 200; ++i) c.points.push_back(Vec3(u(rng), u(rng), u(rng)));
    const Pose pose{Vec3(0.1, 0.1, 0.1), 0.0};
    CHECK_FALSE(m.integrate_scan(c, pose).empty());
    for (int i = 0; i < 20; ++i) m.integrate_scan(c, pose);
    CHECK(m.integrate_scan(c, pose).empty());
  }
}

TEST_CASE("UpdatedCells equals the brute-force state difference") {
  OccupancyConfig cfg;
  const IndexBox box{{-12, -12, -12}, {12, 12, 12}};
  cfg.bounds = box;
  OccupancyMap m(cfg);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5.5, 5.5);
  for (int scan = 0; scan < 25; ++scan) {
    PointCloud c;
    const int n = 1 + scan * 3;
    for (int i = 0; i < n; ++i) c.points.push_back(Vec3(u(rng), u(rng), u(rng)));
    const Pose pose{Vec3(u(rng), u(rng), u(rng)) * 0.3, u(rng)};
    const auto before = snapshot(m, box);
    const auto changed = m.integrate_scan(c, pose);
    const auto after = snapshot(m, box);
    std::vector<VoxelKey> diff;
    for (const auto& [k, s] : after)
      if (before.at(k) != s) diff.push_back(k);
    CHECK(changed == diff);
    for (const auto& [k, s] : after) {
      const auto p = m.probability(k);
      if (p) CHECK((*p >= 0.12 - 1e-12 && *p <= 0.97 + 1e-12));
    }
  }
}

TEST_CASE("neighbors26") {
  const VoxelKey a{3, -2, 7};
  const auto n = neighbors26(a);
  const std::set<VoxelKey> uniq(n.begin(), n.end());
  CHECK(uniq.size() == 26);
  CHECK(uniq.count(a) == 0);
  for (const auto& b : n) {
    CHECK(chebyshev(a, b) == 1);
    const auto back = neighbors26(b);
    CHECK(std::find(back.begin(), back.end(), a) != back.end());
  }
}

TEST_CASE("map text round trip") {
  OccupancyMap m;
  PointCloud c;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 40; ++i) c.points.push_back(Vec3(u(rng), u(rng), u(rng)));
  m.integrate_scan(c, {Vec3(0.1, 0.1, 0.1), 0.3});
  m.integrate_scan(c, {Vec3(0.6, 0.1, 0.1), 0.0});
  std::stringstream ss;
  write_map(ss, m, {{"seed", "1"}});
  const OccupancyMap r = read_map(ss);
  CHECK(r.known_count() == m.known_count());
  for (const auto& [k, s] : m.known_voxels()) {
    CHECK(r.state(k) == s);
    CHECK(*r.log_odds(k) == doctest::Approx(*m.log_odds(k)).epsilon(1e-12));
  }
}

TEST_CASE("config validation") {
  OccupancyConfig cfg;
  cfg.p_hit = 0.4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.clamp_max = 0.4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.resolution = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
