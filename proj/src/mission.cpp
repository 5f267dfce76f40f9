#include "lavatube/mission.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace lavatube {

const char* to_string(MissionPhase p) {
  switch (p) {
    case MissionPhase::Exploring: return "Exploring";
    case MissionPhase::Repositioning: return "Repositioning";
    case MissionPhase::Homing: return "Homing";
    case MissionPhase::Done: return "Done";
  }
  return "?";
}

const char* to_string(MissionOutcome o) {
  switch (o) {
    case MissionOutcome::Complete: return "Complete";
    case MissionOutcome::BudgetHomed: return "BudgetHomed";
    case MissionOutcome::Stuck: return "Stuck";
  }
  return "?";
}

void MissionConfig::validate() const {
  if (!(budget_s > 0.0)) throw std::invalid_argument("budget_s must be positive");
  if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");
  if (!(loop_hz > 0.0)) throw std::invalid_argument("loop_hz must be positive");
  if (scan_every < 1) throw std::invalid_argument("mission.scan_every must be at least 1");
  if (!(lookahead > 0.0)) throw std::invalid_argument("mission.lookahead must be positive");
  if (!(apf_cloud_res > 0.0)) throw std::invalid_argument("mission.apf_cloud_res must be positive");
  if (!(yaw_rate_max > 0.0)) throw std::invalid_argument("mission.yaw_rate_max must be positive");
  if (!(goal_timeout_s > 0.0)) throw std::invalid_argument("mission.goal_timeout_s must be positive");
  if (!(stuck_timeout_s > 0.0)) throw std::invalid_argument("mission.stuck_timeout_s must be positive");
  if (!(homing_timeout_s > 0.0)) throw std::invalid_argument("mission.homing_timeout_s must be positive");
  if (!(home_tolerance > 0.0)) throw std::invalid_argument("mission.home_tolerance must be positive");
  if (!(hover_speed >= 0.0)) throw std::invalid_argument("mission.hover_speed must be non-negative");
  if (world_file.empty()) world.validate();
  sensor.validate();
  occupancy.validate();
  exploration.validate(sensor.max_range);
  risk.validate();
  apf.validate();
  nmpc.validate();
  model.validate();
}

WorldGeometry make_world(const MissionConfig& cfg) {
  if (!cfg.world_file.empty()) {
    std::ifstream in(cfg.world_file);
    if (!in) throw std::runtime_error("cannot open world file " + cfg.world_file);
    return read_world(in);
  }
  return generate_tube(cfg.seed, cfg.world);
}

MissionPhase trigger_homing(MissionPhase phase, double t, bool exploration_complete,
                            const MissionConfig& cfg) {
  if (phase == MissionPhase::Homing || phase == MissionPhase::Done) return phase;
  if (t > cfg.budget_s || exploration_complete) return MissionPhase::Homing;
  return phase;
}

double explored_volume(const OccupancyMap& map) { return map.explored_volume(); }

void record_tick(MissionReport& report, const Vec3& position, const Vec3& velocity, double yaw,
                 double t, double volume, const Vec3& spawn) {
  const Vec3 heading(std::cos(yaw), std::sin(yaw), 0.0);
  const double v_fwd = velocity.dot(heading);
  if (!report.velocity_samples.empty()) {
    const double dt = t - report.volume_series.back().t;
    report.accel_samples.push_back(dt > 0.0 ? (v_fwd - report.velocity_samples.back()) / dt : 0.0);
  }
  report.volume_series.push_back({t, volume});
  report.base_distance_series.push_back({t, (position - spawn).norm()});
  report.velocity_samples.push_back(v_fwd);
}

double hover_fraction(const MissionReport& report, double threshold) {
  if (report.trajectory.empty()) return 0.0;
  const auto n = std::count_if(report.trajectory.begin(), report.trajectory.end(),
                               [&](const TrajectorySample& s) { return s.v.norm() < threshold; });
  return static_cast<double>(n) / static_cast<double>(report.trajectory.size());
}

double distance_travelled(const MissionReport& report) {
  double d = 0.0;
  for (std::size_t i = 1; i < report.trajectory.size(); ++i)
    d += (report.trajectory[i].p - report.trajectory[i - 1].p).norm();
  return d;
}

namespace {

double wrap_angle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

IndexBox domain_for(const WorldGeometry& world, double res) {
  const Vec3 lo = world.bounds_min();
  const Vec3 hi = world.bounds_max();
  const VoxelKey klo = key_of(lo + Vec3::Constant(1e-9), res);
  const VoxelKey khi = key_of(hi - Vec3::Constant(1e-9), res);
  return {klo, khi + VoxelKey{1, 1, 1}};
}

/// Active route: the planned path plus the pure-pursuit cursor and its corridor.
struct Route {
  PlannedPath path;
  std::size_t cursor = 0;
  std::unordered_set<VoxelKey, VoxelKeyHash> corridor;

  void set(PlannedPath p) {
    path = std::move(p);
    cursor = 0;
    corridor.clear();
    for (const VoxelKey& k : path.keys) {
      corridor.insert(k);
      for (const VoxelKey& n : neighbors26(k)) corridor.insert(n);
    }
  }

  bool touched_by(const std::vector<VoxelKey>& changed) const {
    return std::any_of(changed.begin(), changed.end(),
                       [&](const VoxelKey& k) { return corridor.count(k) != 0; });
  }

  Vec3 pursue(const Vec3& pos, double lookahead) {
    const auto& w = path.waypoints;
    const std::size_t window = std::min(w.size(), cursor + 12);
    std::size_t best = cursor;
    for (std::size_t i = cursor; i < window; ++i)
      if ((w[i] - pos).squaredNorm() < (w[best] - pos).squaredNorm()) best = i;
    cursor = best;
    std::size_t i = cursor;
    while (i + 1 < w.size() && (w[i] - pos).norm() < lookahead) ++i;
    return w[i];
  }

  double remaining(const Vec3& pos) const {
    const auto& w = path.waypoints;
    double d = (w[cursor] - pos).norm();
    for (std::size_t i = cursor + 1; i < w.size(); ++i) d += (w[i] - w[i - 1]).norm();
    return d;
  }
};

class Mission {
 public:
  Mission(const MissionConfig& cfg, const WorldGeometry& world)
      : cfg_(cfg),
        world_(world),
        map_(occupancy_config(cfg, world)),
        tracker_(cfg.exploration.n_req),
        grid_(domain_for(world, cfg.occupancy.resolution), cfg.occupancy.resolution, cfg.risk),
        planner_(grid_),
        rng_(cfg.seed) {
    model_ = cfg.model;
    model_.dt = 1.0 / cfg.loop_hz;
    nmpc_ = cfg.nmpc;
    if (nmpc_.v_cap <= 0.0) nmpc_.v_cap = cfg.v_max;
    res_ = cfg.occupancy.resolution;
    spawn_ = world.spawn().position;
    x_.p = spawn_;
    yaw_ = world.spawn().yaw;
    u_ = {model_.g, 0.0, 0.0};
    v_fwd_ = Vec3(std::cos(yaw_), std::sin(yaw_), 0.0);
    reachable_ = world.reachable_free(key_of(spawn_, world.resolution()));
  }

  MissionReport run() {
    report_.dt = model_.dt;
    report_.reachable_voxels = reachable_.size();
    report_.min_clearance = std::numeric_limits<double>::infinity();
    double last_progress_t = 0.0;
    std::size_t last_known = 0;
    double best_target_dist = std::numeric_limits<double>::infinity();
    std::optional<Vec3> last_target;

    for (int tick = 0; phase_ != MissionPhase::Done; ++tick) {
      const double t = tick * model_.dt;
      if (tick % cfg_.scan_every == 0) sense(t);

      const MissionPhase before = phase_;
      phase_ = trigger_homing(phase_, t, complete_, cfg_);
      if (phase_ == MissionPhase::Homing && before != MissionPhase::Homing) start_homing(t, tick);

      if (phase_ == MissionPhase::Exploring || phase_ == MissionPhase::Repositioning) explore_step(t, tick);
      if (phase_ == MissionPhase::Homing) homing_step(t);
      if (phase_ == MissionPhase::Done) break;

      maybe_replan();
      control_step(t);

      const double t1 = (tick + 1) * model_.dt;
      const double clearance = world_.clearance(x_.p, 3.0);
      report_.min_clearance = std::min(report_.min_clearance, clearance);
      if (clearance <= cfg_.risk.vehicle_radius) ++report_.collisions;
      record_tick(report_, x_.p, x_.v, yaw_, t1, explored_volume(map_), spawn_);
      report_.trajectory.push_back({t1, x_.p, x_.v, yaw_, phase_, std::min(clearance, 1e3)});
      report_.ticks = tick + 1;

      // Progress watchdog: new map knowledge or a closer approach to the current target.
      const std::optional<Vec3> target = current_target();
      if (target != last_target) {
        last_target = target;
        best_target_dist = std::numeric_limits<double>::infinity();
      }
      if (target) {
        const double d = (x_.p - *target).norm();
        if (d < best_target_dist - 0.25) {
          best_target_dist = d;
          last_progress_t = t1;
        }
      }
      if (map_.known_count() > last_known) {
        last_known = map_.known_count();
        last_progress_t = t1;
      }
      if (phase_ == MissionPhase::Homing && (x_.p - spawn_).norm() <= cfg_.home_tolerance) {
        finish(complete_ ? MissionOutcome::Complete : MissionOutcome::BudgetHomed, "home reached");
      } else if (t1 - last_progress_t > cfg_.stuck_timeout_s) {
        finish(MissionOutcome::Stuck, "no progress");
      } else if (homing_t_ && t1 - *homing_t_ > cfg_.homing_timeout_s) {
        finish(MissionOutcome::Stuck, "homing time exhausted");
      }
    }
    report_.reachable_known_final = reachable_known();
    report_.final_home_distance = (x_.p - spawn_).norm();
    if (!std::isfinite(report_.min_clearance)) report_.min_clearance = 1e3;
    return std::move(report_);
  }

  OccupancyMap take_map() { return std::move(map_); }

 private:
  static OccupancyConfig occupancy_config(const MissionConfig& cfg, const WorldGeometry& world) {
    OccupancyConfig oc = cfg.occupancy;
    oc.bounds = domain_for(world, oc.resolution);
    return oc;
  }

  double reachable_known() const {
    if (reachable_.empty()) return 1.0;
    std::size_t known = 0;
    const bool same = world_.resolution() == res_;
    for (const VoxelKey& k : reachable_) {
      const VoxelKey mk = same ? k : key_of(center_of(k, world_.resolution()), res_);
      known += map_.state(mk) != VoxelState::Unknown;
    }
    return static_cast<double>(known) / static_cast<double>(reachable_.size());
  }

  void sense(double t) {
    const Pose pose{x_.p, yaw_};
    const PointCloud cloud = simulate_lidar(pose, cfg_.sensor, world_, rng_, t);
    const UpdatedCells changed = map_.integrate_scan(cloud, pose);
    tracker_.update(map_, changed);
    const auto cost_changed = grid_.apply_changes(map_, changed);
    pending_.insert(pending_.end(), cost_changed.begin(), cost_changed.end());

    // Voxel filter so that the repulsion does not scale with beam density.
    std::set<VoxelKey> seen;
    cloud_.clear();
    for (const Vec3& p : cloud.points) {
      const Vec3 w = rotate_z(p, yaw_) + x_.p;
      if (seen.insert(key_of(w, cfg_.apf_cloud_res)).second) cloud_.push_back(w);
    }
  }

  VoxelKey start_key() const {
    const VoxelKey k = key_of(x_.p, res_);
    if (grid_.contains(k) && grid_.state(k) != VoxelState::Occupied) return k;
    VoxelKey best = k;
    double best_d = std::numeric_limits<double>::infinity();
    for (const VoxelKey& n : neighbors26(k)) {
      if (!grid_.contains(n) || grid_.state(n) == VoxelState::Occupied) continue;
      const double d = (center_of(n, res_) - x_.p).norm();
      if (d < best_d) {
        best_d = d;
        best = n;
      }
    }
    return best;
  }

  std::optional<PlannedPath> plan_to(const VoxelKey& goal) {
    ++report_.plans;
    pending_.clear();
    try {
      return planner_.plan(start_key(), goal);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }

  void maybe_replan() {
    if (!route_ || pending_.empty()) return;
    if (!route_->touched_by(pending_)) return;
    std::sort(pending_.begin(), pending_.end());
    pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
    std::optional<PlannedPath> p;
    try {
      p = planner_.replan_on_update(pending_, start_key());
    } catch (const std::invalid_argument&) {
    }
    pending_.clear();
    ++report_.replans;
    if (p) {
      route_->set(std::move(*p));
      return;
    }
    route_.reset();
    if (phase_ == MissionPhase::Homing) return;
    inaccessible_.insert(goal_);
    ++report_.inaccessible_goals;
    have_goal_ = false;
  }

  void explore_step(double t, int tick) {
    if (have_goal_) {
      const bool reached = (x_.p - center_of(goal_, res_)).norm() <= 2.0 * res_;
      const bool stale = !tracker_.contains(goal_);
      const bool timed_out = t - goal_t_ > cfg_.goal_timeout_s;
      if (timed_out) {
        inaccessible_.insert(goal_);
        ++report_.inaccessible_goals;
      }
      if (reached && !stale) retire_nearby(center_of(goal_, res_));
      if (reached || stale || timed_out || !route_) have_goal_ = false;
    }
    if (have_goal_) return;
    route_.reset();

    for (int attempt = 0; attempt < 24; ++attempt) {
      FrontierSets sets = classify_frontiers(tracker_.frontiers(map_, cfg_.exploration, x_.p), x_.p,
                                             v_fwd_, cfg_.exploration, inaccessible_);
      sets.global_leftover = leftover_;
      sets = merge_global_frontiers(std::move(sets), map_, x_.p, v_fwd_, cfg_.exploration);
      leftover_ = sets.global_leftover;
      const SelectionResult sel = select_candidate(sets, cfg_.exploration);
      if (std::holds_alternative<ExplorationComplete>(sel)) {
        complete_ = true;
        phase_ = trigger_homing(phase_, t, complete_, cfg_);
        start_homing(t, tick);
        return;
      }
      const CandidateSelection& c = std::get<CandidateSelection>(sel);
      auto p = plan_to(c.frontier.key);
      if (!p) {
        inaccessible_.insert(c.frontier.key);
        std::erase_if(leftover_, [&](const Frontier& f) { return f.key == c.frontier.key; });
        ++report_.inaccessible_goals;
        continue;
      }
      goal_ = c.frontier.key;
      goal_t_ = t;
      have_goal_ = true;
      route_.emplace();
      route_->set(std::move(*p));
      phase_ = c.repositioning ? MissionPhase::Repositioning : MissionPhase::Exploring;
      if (c.repositioning)
        report_.repositioning_events.push_back({t, tick, x_.p, c.frontier.position, sets.direct.size(),
                                                sets.indirect.size(), sets.global_leftover.size()});
      return;
    }
  }

  // A reached frontier that is still open cannot be resolved from here (sensor blind cone).
  void retire_nearby(const Vec3& centre) {
    for (const VoxelKey& k : tracker_.cells())
      if ((center_of(k, res_) - centre).norm() <= 2.0 * res_ && inaccessible_.insert(k).second) ++report_.retired_goals;
  }

  void start_homing(double t, int tick) {
    if (homing_t_) return;
    homing_t_ = t;
    report_.homing_trigger_t = t;
    report_.homing_trigger_tick = tick;
    report_.exploration_complete = complete_;
    report_.reachable_known_at_homing = reachable_known();
    have_goal_ = false;
    route_.reset();
    goal_ = key_of(spawn_, res_);
    if ((x_.p - spawn_).norm() <= cfg_.home_tolerance) return;
    auto p = plan_to(goal_);
    if (!p) {
      finish(MissionOutcome::Stuck, "no known path to spawn");
      return;
    }
    route_.emplace();
    route_->set(std::move(*p));
  }

  void homing_step(double) {
    if (route_ || (x_.p - spawn_).norm() <= cfg_.home_tolerance) return;
    auto p = plan_to(goal_);
    if (!p) return;
    route_.emplace();
    route_->set(std::move(*p));
  }

  std::optional<Vec3> current_target() const {
    if (phase_ == MissionPhase::Homing) return spawn_;
    if (have_goal_) return center_of(goal_, res_);
    return std::nullopt;
  }

  void control_step(double t) {
    Vec3 waypoint = x_.p;
    double remaining = 0.0;
    if (route_) {
      waypoint = route_->pursue(x_.p, cfg_.lookahead);
      remaining = route_->remaining(x_.p);
      if (phase_ == MissionPhase::Homing) {
        remaining = std::max(remaining, (x_.p - spawn_).norm());
        if (route_->cursor + 1 >= route_->path.waypoints.size()) waypoint = spawn_;
      }
    }

    std::vector<Vec3> rel;
    const double r2 = cfg_.apf.r_f * cfg_.apf.r_f;
    for (const Vec3& w : cloud_)
      if ((w - x_.p).squaredNorm() <= r2) rel.push_back(w - x_.p);
    const ApfOutput apf = compute_reference(waypoint, x_.p, rel, force_, cfg_.apf);

    McqState ref;
    ref.p = apf.reference;
    const Vec3 step = apf.reference - x_.p;
    if (step.norm() > 0.0) {
      const double v_des = std::min(cfg_.v_max, 0.6 * remaining);
      ref.v = step.normalized() * v_des;
    }

    const Vec3 look = waypoint - x_.p;
    if (look.head<2>().norm() > 0.1) {
      const double want = std::atan2(look.y(), look.x());
      const double lim = cfg_.yaw_rate_max * model_.dt;
      yaw_ = wrap_angle(yaw_ + std::clamp(wrap_angle(want - yaw_), -lim, lim));
    }

    const NmpcResult r = nmpc_solve(x_, ref, u_, nmpc_, model_, warm_.empty() ? nullptr : &warm_);
    if (!r.converged) ++report_.solver_warnings;
    warm_.assign(r.inputs.begin() + 1, r.inputs.end());
    warm_.push_back(r.inputs.back());
    u_ = r.inputs.front();
    report_.control_trace.push_back({t, x_, u_, r.iterations});

    const Vec3 before = x_.p;
    x_ = dynamics_step(x_, u_, model_);
    v_fwd_ = forward_direction(before, x_.p, v_fwd_);
  }

  void finish(MissionOutcome o, const char* why) {
    phase_ = MissionPhase::Done;
    report_.outcome = o;
    report_.stop_reason = why;
  }

  MissionConfig cfg_;
  const WorldGeometry& world_;
  OccupancyMap map_;
  FrontierTracker tracker_;
  RiskGrid grid_;
  RiskPlanner planner_;
  std::mt19937_64 rng_;
  ModelParams model_;
  NmpcConfig nmpc_;
  double res_ = 0.5;
  Vec3 spawn_;
  std::vector<VoxelKey> reachable_;

  McqState x_;
  double yaw_ = 0.0;
  ControlInput u_;
  std::vector<ControlInput> warm_;
  Vec3 v_fwd_;
  ForceState force_;
  std::vector<Vec3> cloud_;  ///< last scan, world frame

  MissionPhase phase_ = MissionPhase::Exploring;
  bool complete_ = false;
  std::optional<double> homing_t_;
  bool have_goal_ = false;
  VoxelKey goal_{};
  double goal_t_ = 0.0;
  std::optional<Route> route_;
  std::vector<VoxelKey> pending_;
  std::set<VoxelKey> inaccessible_;
  std::vector<Frontier> leftover_;

  MissionReport report_;
};

void write_meta(std::ostream& out, const std::map<std::string, std::string>& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << std::setprecision(10);
  return out;
}

}  // namespace

MissionReport run_mission(const MissionConfig& cfg, const WorldGeometry& world, OccupancyMap* final_map) {
  cfg.validate();
  Mission m(cfg, world);
  MissionReport r = m.run();
  if (final_map) *final_map = m.take_map();
  return r;
}

MissionReport run_mission(const MissionConfig& cfg) {
  cfg.validate();
  const WorldGeometry world = make_world(cfg);
  return run_mission(cfg, world);
}

void write_report(const std::filesystem::path& dir, const MissionReport& report,
                  const MissionConfig& cfg, const std::map<std::string, std::string>& meta) {
  {
    auto out = open_out(dir / "volume.csv");
    write_meta(out, meta);
    out << "t,volume_m3\n";
    for (const auto& s : report.volume_series) out << s.t << ',' << s.value << '\n';
  }
  {
    auto out = open_out(dir / "distance.csv");
    write_meta(out, meta);
    out << "t,distance_m\n";
    for (const auto& s : report.base_distance_series) out << s.t << ',' << s.value << '\n';
  }
  {
    auto out = open_out(dir / "velocity.csv");
    write_meta(out, meta);
    out << "t,v_forward\n";
    for (std::size_t i = 0; i < report.velocity_samples.size(); ++i)
      out << report.volume_series[i].t << ',' << report.velocity_samples[i] << '\n';
  }
  {
    auto out = open_out(dir / "acceleration.csv");
    write_meta(out, meta);
    out << "t,a_forward\n";
    for (std::size_t i = 0; i < report.accel_samples.size(); ++i)
      out << report.volume_series[i + 1].t << ',' << report.accel_samples[i] << '\n';
  }
  {
    auto out = open_out(dir / "trajectory.csv");
    write_meta(out, meta);
    out << "t,px,py,pz,vx,vy,vz,yaw,phase,clearance\n";
    for (const auto& s : report.trajectory)
      out << s.t << ',' << s.p.x() << ',' << s.p.y() << ',' << s.p.z() << ',' << s.v.x() << ','
          << s.v.y() << ',' << s.v.z() << ',' << s.yaw << ',' << to_string(s.phase) << ','
          << s.clearance << '\n';
  }
  {
    auto out = open_out(dir / "events.csv");
    write_meta(out, meta);
    out << "t,tick,px,py,pz,tx,ty,tz,direct,indirect,leftover\n";
    for (const auto& e : report.repositioning_events)
      out << e.t << ',' << e.tick << ',' << e.position.x() << ',' << e.position.y() << ','
          << e.position.z() << ',' << e.target.x() << ',' << e.target.y() << ',' << e.target.z()
          << ',' << e.direct << ',' << e.indirect << ',' << e.leftover << '\n';
  }
  {
    auto out = open_out(dir / "control.csv");
    write_meta(out, meta);
    write_control_trace(out, report.control_trace);
  }

  nlohmann::ordered_json j;
  for (const auto& [k, v] : meta) j["meta"][k] = v;
  j["outcome"] = to_string(report.outcome);
  j["stop_reason"] = report.stop_reason;
  j["ticks"] = report.ticks;
  j["dt"] = report.dt;
  j["budget_s"] = cfg.budget_s;
  j["v_max"] = cfg.v_max;
  j["homing_trigger_t"] = report.homing_trigger_t ? nlohmann::json(*report.homing_trigger_t) : nlohmann::json();
  j["homing_trigger_tick"] = report.homing_trigger_tick;
  j["exploration_complete"] = report.exploration_complete;
  j["explored_volume_m3"] = report.volume_series.empty() ? 0.0 : report.volume_series.back().value;
  j["reachable_voxels"] = report.reachable_voxels;
  j["reachable_known_at_homing"] = report.reachable_known_at_homing;
  j["reachable_known_final"] = report.reachable_known_final;
  j["distance_travelled_m"] = distance_travelled(report);
  j["hover_fraction"] = hover_fraction(report, cfg.hover_speed);
  j["min_clearance_m"] = report.min_clearance;
  j["collisions"] = report.collisions;
  j["final_home_distance_m"] = report.final_home_distance;
  j["solver_warnings"] = report.solver_warnings;
  j["plans"] = report.plans;
  j["replans"] = report.replans;
  j["inaccessible_goals"] = report.inaccessible_goals;
  j["retired_goals"] = report.retired_goals;
  j["repositioning_count"] = report.repositioning_events.size();
  auto& ev = j["repositioning_events"] = nlohmann::json::array();
  for (const auto& e : report.repositioning_events)
    ev.push_back({{"t", e.t}, {"tick", e.tick}, {"direct", e.direct}, {"indirect", e.indirect},
                  {"leftover", e.leftover},
                  {"target", {e.target.x(), e.target.y(), e.target.z()}}});
  auto out = open_out(dir / "summary.json");
  out << j.dump(2) << '\n';
}

}  // namespace lavatube
