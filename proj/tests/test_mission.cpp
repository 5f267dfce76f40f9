#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lavatube/mission.hpp"
#include "support/oracles.hpp"

using namespace lavatube;

namespace {

MissionConfig straight_tube(double length) {
  MissionConfig c;
  c.seed = 4;
  c.world.length = length;
  c.world.branch_count = 0;
  c.world.dead_end_count = 0;
  c.budget_s = 300.0;
  return c;
}

bool same_report(const MissionReport& a, const MissionReport& b) {
  if (a.trajectory.size() != b.trajectory.size()) return false;
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    const auto &x = a.trajectory[i], &y = b.trajectory[i];
    if (x.t != y.t || x.p != y.p || x.v != y.v || x.yaw != y.yaw || x.phase != y.phase) return false;
  }
  for (std::size_t i = 0; i < a.volume_series.size(); ++i)
    if (a.volume_series[i].value != b.volume_series[i].value) return false;
  return a.velocity_samples == b.velocity_samples && a.accel_samples == b.accel_samples &&
         a.outcome == b.outcome && a.repositioning_events.size() == b.repositioning_events.size();
}

}  // namespace

TEST_CASE("trigger_homing") {
  MissionConfig c;
  c.budget_s = 100.0;
  CHECK(trigger_homing(MissionPhase::Exploring, 100.0 + 1e-9, false, c) == MissionPhase::Homing);
  CHECK(trigger_homing(MissionPhase::Exploring, 50.0, false, c) == MissionPhase::Exploring);
  CHECK(trigger_homing(MissionPhase::Repositioning, 50.0, true, c) == MissionPhase::Homing);
  CHECK(trigger_homing(MissionPhase::Homing, 0.0, false, c) == MissionPhase::Homing);
  CHECK(trigger_homing(MissionPhase::Done, 1e9, false, c) == MissionPhase::Done);
}

TEST_CASE("record_tick") {
  MissionReport r;
  const Vec3 spawn(1, 2, 3);
  record_tick(r, spawn, Vec3::Zero(), 0.3, 0.05, 0.0, spawn);
  CHECK(r.velocity_samples.back() == 0.0);
  CHECK(r.base_distance_series.back().value == 0.0);
  CHECK(r.accel_samples.empty());

  const double yaw = 0.7;
  const Vec3 heading(std::cos(yaw), std::sin(yaw), 0.0);
  record_tick(r, spawn + Vec3(3, 4, 0), 1.5 * heading, yaw, 0.10, 1.0, spawn);
  CHECK(r.velocity_samples.back() == doctest::Approx(1.5));
  CHECK(r.base_distance_series.back().value == doctest::Approx(5.0));
  CHECK(r.accel_samples.back() == doctest::Approx(1.5 / 0.05));

  record_tick(r, spawn, -0.4 * heading, yaw, 0.15, 1.0, spawn);
  CHECK(r.velocity_samples.back() == doctest::Approx(-0.4));
  CHECK(r.volume_series.size() == 3);
}

TEST_CASE("explored_volume") {
  OccupancyMap fresh;
  CHECK(explored_volume(fresh) == 0.0);

  // One scan in a walled box: the known set is the union of voxels pierced by the beams.
  WorldBuilder b({{-12, -12, -6}, {12, 12, 6}}, 0.5, false);
  b.fill_box(Vec3(-6, -6, -3), Vec3(6, 6, 3), true);
  b.fill_box(Vec3(-4, -4, -1.5), Vec3(4, 4, 1.5), false);
  b.set_spawn({Vec3(0.25, 0.25, 0.25), 0.0});
  const WorldGeometry w = std::move(b).build();
  SensorSpec spec;
  spec.rays_per_ring = 60;
  spec.rings = 6;
  std::mt19937_64 rng(1);
  const Pose pose{Vec3(0.25, 0.25, 0.25), 0.0};
  const PointCloud cloud = simulate_lidar(pose, spec, w, rng);
  OccupancyMap m;
  m.integrate_scan(cloud, pose);
  std::set<VoxelKey> carved;
  for (const Vec3& p : cloud.points) {
    const auto s = oracle::pierced_voxels(pose.position, pose.position + p, 0.5);
    carved.insert(s.begin(), s.end());
    carved.insert(key_of(pose.position + p, 0.5));  // endpoints sit on voxel faces
  }
  CHECK(explored_volume(m) == doctest::Approx(carved.size() * 0.125).epsilon(1e-12));
}

TEST_CASE("config validation names the key") {
  MissionConfig c;
  CHECK_NOTHROW(c.validate());
  c.budget_s = -1;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("budget_s"), std::invalid_argument);
  c = MissionConfig{};
  c.scan_every = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("mission.scan_every"), std::invalid_argument);
}

TEST_CASE("straight tube mission") {
  const MissionConfig cfg = straight_tube(20.0);
  const WorldGeometry world = make_world(cfg);
  OccupancyMap map;
  const MissionReport r = run_mission(cfg, world, &map);
  INFO("outcome " << to_string(r.outcome) << " ticks " << r.ticks << " known " << r.reachable_known_final);

  // Independent recount of the reachable set against the final map.
  const auto reach = world.reachable_free(key_of(world.spawn().position, world.resolution()));
  std::size_t known = 0;
  for (const VoxelKey& k : reach) known += map.state(k) != VoxelState::Unknown;
  CHECK(static_cast<double>(known) / reach.size() >= 0.95);
  CHECK(r.outcome == MissionOutcome::Complete);
  CHECK(r.exploration_complete);
  CHECK(r.final_home_distance <= cfg.home_tolerance);

  CHECK(r.collisions == 0);
  for (const auto& s : r.trajectory) {
    CHECK(world.clearance(s.p, 3.0) > cfg.risk.vehicle_radius);
    CHECK(s.v.norm() <= cfg.v_max + 0.1);
  }
  for (std::size_t i = 1; i < r.volume_series.size(); ++i) {
    CHECK(r.volume_series[i].t > r.volume_series[i - 1].t);
    CHECK(r.volume_series[i].value >= r.volume_series[i - 1].value);
  }
  for (const auto& e : r.repositioning_events) {
    CHECK(e.direct == 0);
    CHECK(e.indirect + e.leftover > 0);
  }
  CHECK(r.velocity_samples.size() == static_cast<std::size_t>(r.ticks));
  CHECK(r.accel_samples.size() + 1 == r.velocity_samples.size());
}

TEST_CASE("budget expiry switches to homing within one tick") {
  MissionConfig cfg = straight_tube(40.0);
  cfg.budget_s = 6.0;
  const MissionReport r = run_mission(cfg);
  REQUIRE(r.homing_trigger_t.has_value());
  CHECK(*r.homing_trigger_t > cfg.budget_s);
  CHECK(*r.homing_trigger_t <= cfg.budget_s + r.dt + 1e-9);
  CHECK_FALSE(r.exploration_complete);
  CHECK(r.outcome == MissionOutcome::BudgetHomed);
  CHECK(r.final_home_distance <= cfg.home_tolerance);
  for (const auto& s : r.trajectory)
    if (s.t > *r.homing_trigger_t + r.dt) CHECK(s.phase == MissionPhase::Homing);
}

TEST_CASE("fully mapped room completes at once") {
  WorldBuilder b({{-8, -8, -8}, {8, 8, 8}}, 0.5, true);
  b.fill_box(Vec3(-0.75, -0.75, -0.75), Vec3(0.75, 0.75, 0.75), false);
  b.set_spawn({Vec3(0.25, 0.25, 0.25), 0.0});
  const WorldGeometry w = std::move(b).build();
  MissionConfig cfg;
  cfg.sensor.v_fov = std::acos(-1.0);
  const MissionReport r = run_mission(cfg, w);
  INFO(r.stop_reason << " ticks " << r.ticks);
  CHECK(r.outcome == MissionOutcome::Complete);
  CHECK(r.exploration_complete);
  REQUIRE(r.homing_trigger_t.has_value());
  CHECK(r.homing_trigger_tick == 0);
  CHECK(r.ticks <= 1);
}

TEST_CASE("homing without a known path ends stuck") {
  // A large vehicle radius inflates walls over the spawn voxel but leaves the tube centre open.
  MissionConfig cfg = straight_tube(30.0);
  cfg.budget_s = 10.0;
  cfg.risk.vehicle_radius = 1.2;
  const MissionReport r = run_mission(cfg);
  INFO(r.stop_reason << " t " << r.ticks * r.dt << " plans " << r.plans << " inacc " << r.inaccessible_goals);
  CHECK(r.outcome == MissionOutcome::Stuck);
  CHECK(r.stop_reason == "no known path to spawn");
}

TEST_CASE("identical configs give identical reports") {
  MissionConfig cfg = straight_tube(20.0);
  cfg.budget_s = 8.0;
  cfg.sensor.noise_sigma = 0.02;
  const MissionReport a = run_mission(cfg);
  const MissionReport b = run_mission(cfg);
  CHECK(same_report(a, b));
  cfg.seed += 1;
  CHECK_FALSE(same_report(a, run_mission(cfg)));
}

TEST_CASE("hover fraction and distance") {
  MissionReport r;
  for (int i = 0; i < 10; ++i) r.trajectory.push_back({0.05 * i, Vec3(0.1 * i, 0, 0), Vec3(i < 3 ? 0.0 : 1.0, 0, 0)});
  CHECK(hover_fraction(r, 0.05) == doctest::Approx(0.3));
  CHECK(distance_travelled(r) == doctest::Approx(0.9));
}
