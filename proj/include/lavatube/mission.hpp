#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lavatube/avoidance.hpp"
#include "lavatube/flight_control.hpp"
#include "lavatube/frontier.hpp"
#include "lavatube/occupancy_map.hpp"
#include "lavatube/risk_planner.hpp"
#include "lavatube/world.hpp"

namespace lavatube {

enum class MissionPhase { Exploring, Repositioning, Homing, Done };
enum class MissionOutcome { Complete, BudgetHomed, Stuck };

const char* to_string(MissionPhase p);
const char* to_string(MissionOutcome o);

struct MissionConfig {
  double budget_s = 600.0;
  double v_max = 1.5;   ///< m/s
  double loop_hz = 20.0;
  uint64_t seed = 1;
  int scan_every = 2;   ///< ticks between lidar scans

  TubeParams world;
  std::string world_file;  ///< overrides `world` when set

  SensorSpec sensor;
  OccupancyConfig occupancy;
  ExplorationConfig exploration;
  RiskConfig risk;
  ApfConfig apf;
  NmpcConfig nmpc;
  ModelParams model;  ///< dt is replaced by 1 / loop_hz

  double lookahead = 1.5;          ///< m, pure-pursuit distance along the planned path
  double apf_cloud_res = 0.25;     ///< m, voxel filter applied to the cloud before the field
  double yaw_rate_max = 0.5;       ///< rad/s
  double goal_timeout_s = 40.0;    ///< an unreached goal is marked inaccessible after this
  double stuck_timeout_s = 30.0;
  double homing_timeout_s = 600.0; ///< extra time allowed after the homing trigger
  double home_tolerance = 1.0;     ///< m
  double hover_speed = 0.05;       ///< m/s, hover-fraction threshold

  void validate() const;
};

struct TimedValue {
  double t = 0.0;
  double value = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double yaw = 0.0;
  MissionPhase phase = MissionPhase::Exploring;
  double clearance = 0.0;  ///< to the nearest ground-truth solid voxel centre
};

struct RepositioningEvent {
  double t = 0.0;
  int tick = 0;
  Vec3 position = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  std::size_t direct = 0;  ///< |D| at selection
  std::size_t indirect = 0;
  std::size_t leftover = 0;
};

struct MissionReport {
  std::vector<TimedValue> volume_series;
  std::vector<TimedValue> base_distance_series;
  std::vector<double> velocity_samples;  ///< signed forward speed per tick
  std::vector<double> accel_samples;     ///< finite difference of the forward speed
  std::vector<TrajectorySample> trajectory;
  std::vector<RepositioningEvent> repositioning_events;
  std::vector<ControlTraceRow> control_trace;
  MissionOutcome outcome = MissionOutcome::Stuck;

  int ticks = 0;
  double dt = 0.05;
  std::optional<double> homing_trigger_t;
  int homing_trigger_tick = -1;
  bool exploration_complete = false;
  double reachable_known_at_homing = 0.0;  ///< share of flood-fill reachable free voxels known
  double reachable_known_final = 0.0;
  std::size_t reachable_voxels = 0;
  double min_clearance = 0.0;
  int collisions = 0;  ///< ticks with clearance <= vehicle radius
  double final_home_distance = 0.0;
  int solver_warnings = 0;
  int inaccessible_goals = 0;
  int retired_goals = 0;  ///< reached but still open; never selected again
  int plans = 0;
  int replans = 0;
  std::string stop_reason;
};

/// Builds the configured world (file or generator).
WorldGeometry make_world(const MissionConfig& cfg);

/// Runs the closed loop on `world` until Done. Deterministic for a fixed config.
/// `final_map` receives the built map when non-null.
MissionReport run_mission(const MissionConfig& cfg, const WorldGeometry& world,
                          OccupancyMap* final_map = nullptr);
MissionReport run_mission(const MissionConfig& cfg);

/// Homing iff t > budget_s or exploration is complete; Homing and Done are absorbing.
MissionPhase trigger_homing(MissionPhase phase, double t, bool exploration_complete,
                            const MissionConfig& cfg);

/// (Free + Occupied) * resolution^3.
double explored_volume(const OccupancyMap& map);

/// Appends one tick of metrics. `volume` is the explored volume after the tick.
void record_tick(MissionReport& report, const Vec3& position, const Vec3& velocity, double yaw,
                 double t, double volume, const Vec3& spawn);

/// Share of ticks whose speed is below `threshold`.
double hover_fraction(const MissionReport& report, double threshold);
/// Path length of the trajectory.
double distance_travelled(const MissionReport& report);

/// Writes volume.csv, distance.csv, velocity.csv, acceleration.csv, trajectory.csv, events.csv,
/// control.csv and summary.json into `dir`. `meta` lines head every file.
void write_report(const std::filesystem::path& dir, const MissionReport& report,
                  const MissionConfig& cfg, const std::map<std::string, std::string>& meta);

}  // namespace lavatube
