#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lavatube/config.hpp"
#include "lavatube/mission.hpp"

namespace py = pybind11;
using namespace lavatube;

namespace {

VoxelKey to_key(const std::array<int, 3>& k) { return {k[0], k[1], k[2]}; }
std::array<int, 3> from_key(const VoxelKey& k) { return {k.x, k.y, k.z}; }

VoxelState parse_state(const std::string& s) {
  if (s == "free") return VoxelState::Free;
  if (s == "occupied") return VoxelState::Occupied;
  if (s == "unknown") return VoxelState::Unknown;
  throw std::invalid_argument("state must be free, occupied or unknown, got '" + s + "'");
}

std::string state_name(VoxelState s) {
  switch (s) {
    case VoxelState::Free: return "free";
    case VoxelState::Occupied: return "occupied";
    default: return "unknown";
  }
}

py::dict summarize(const MissionReport& r, const MissionConfig& cfg) {
  py::dict d;
  d["outcome"] = to_string(r.outcome);
  d["stop_reason"] = r.stop_reason;
  d["ticks"] = r.ticks;
  d["dt"] = r.dt;
  d["homing_trigger_t"] = r.homing_trigger_t ? py::cast(*r.homing_trigger_t) : py::none();
  d["exploration_complete"] = r.exploration_complete;
  d["reachable_known_at_homing"] = r.reachable_known_at_homing;
  d["reachable_known_final"] = r.reachable_known_final;
  d["min_clearance"] = r.min_clearance;
  d["collisions"] = r.collisions;
  d["final_home_distance"] = r.final_home_distance;
  d["repositioning_events"] = r.repositioning_events.size();
  d["hover_fraction"] = hover_fraction(r, cfg.hover_speed);
  d["distance_travelled"] = distance_travelled(r);
  std::vector<double> t, vol;
  for (const auto& s : r.volume_series) {
    t.push_back(s.t);
    vol.push_back(s.value);
  }
  d["t"] = t;
  d["explored_volume"] = vol;
  std::vector<std::array<double, 3>> pos;
  for (const auto& s : r.trajectory) pos.push_back({s.p.x(), s.p.y(), s.p.z()});
  d["positions"] = pos;
  d["forward_speed"] = r.velocity_samples;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lavatube, m) {
  m.doc() = "Lava-tube exploration: mapping, frontiers, risk-aware planning, avoidance and control";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<MissionConfig>(m, "Config")
      .def(py::init<>())
      .def("set", [](MissionConfig& c, const std::string& k, const std::string& v) { set_config_value(c, k, v); })
      .def("echo", [](const MissionConfig& c) { return echo_config(c); })
      .def("hash", [](const MissionConfig& c) { return config_hash(c); })
      .def("validate", &MissionConfig::validate)
      .def_readwrite("seed", &MissionConfig::seed)
      .def_readwrite("budget_s", &MissionConfig::budget_s)
      .def_readwrite("v_max", &MissionConfig::v_max)
      .def_readwrite("loop_hz", &MissionConfig::loop_hz);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"));
  m.def("config_keys", &config_keys);

  m.def(
      "run_mission",
      [](const MissionConfig& cfg, std::optional<std::filesystem::path> out_dir) {
        cfg.validate();
        MissionReport r;
        {
          py::gil_scoped_release release;
          r = run_mission(cfg);
        }
        if (out_dir) write_report(*out_dir, r, cfg, {{"seed", std::to_string(cfg.seed)}, {"config_hash", config_hash(cfg)}});
        return summarize(r, cfg);
      },
      py::arg("config"), py::arg("out_dir") = std::nullopt,
      "Runs the closed-loop mission and returns its metrics; writes the report files when out_dir is given.");

  py::class_<OccupancyMap>(m, "OccupancyMap")
      .def(py::init<>())
      .def("update_voxel", [](OccupancyMap& map, std::array<int, 3> k, bool hit) { return map.update_voxel(to_key(k), hit); })
      .def("probability", [](const OccupancyMap& map, std::array<int, 3> k) { return map.probability(to_key(k)); })
      .def("state", [](const OccupancyMap& map, std::array<int, 3> k) { return state_name(map.state(to_key(k))); })
      .def("integrate_scan",
           [](OccupancyMap& map, const std::vector<Vec3>& points, const Vec3& position, double yaw) {
             PointCloud c;
             c.points = points;
             std::vector<std::array<int, 3>> out;
             for (const auto& k : map.integrate_scan(c, {position, yaw})) out.push_back(from_key(k));
             return out;
           },
           py::arg("points"), py::arg("position"), py::arg("yaw") = 0.0)
      .def_property_readonly("known_count", &OccupancyMap::known_count)
      .def_property_readonly("explored_volume", [](const OccupancyMap& map) { return explored_volume(map); });

  m.def(
      "plan",
      [](const std::array<int, 3>& size, const std::map<std::array<int, 3>, std::string>& states,
         const std::array<int, 3>& start, const std::array<int, 3>& goal) -> py::object {
        const IndexBox box{{0, 0, 0}, {size[0], size[1], size[2]}};
        RiskGrid grid(box, 0.5, RiskConfig{});
        std::vector<std::pair<VoxelKey, VoxelState>> init;
        for (const auto& [k, s] : states) init.emplace_back(to_key(k), parse_state(s));
        grid.set_states(init);
        RiskPlanner planner(grid);
        const auto path = planner.plan(to_key(start), to_key(goal));
        if (!path) return py::none();
        std::vector<std::array<int, 3>> keys;
        for (const auto& k : path->keys) keys.push_back(from_key(k));
        return py::make_tuple(path->total_cost, keys);
      },
      py::arg("size"), py::arg("states"), py::arg("start"), py::arg("goal"),
      "Risk-aware path over a grid whose unlisted voxels are unknown. Returns (cost, keys) or None.");

  m.def("repulsive_force", [](const std::vector<Vec3>& points) { return repulsive_force(points, ApfConfig{}); },
        py::arg("points"));

  m.def(
      "nmpc_first_input",
      [](const Vec3& p, const Vec3& v, const Vec3& p_ref) {
        McqState x, ref;
        x.p = p;
        x.v = v;
        ref.p = p_ref;
        const ModelParams model;
        const auto r = nmpc_solve(x, ref, {model.g, 0.0, 0.0}, NmpcConfig{}, model);
        return py::make_tuple(r.inputs.front().T, r.inputs.front().phi_ref, r.inputs.front().theta_ref);
      },
      py::arg("position"), py::arg("velocity"), py::arg("reference"),
      "First (T, phi_ref, theta_ref) of the horizon from a level attitude and hover input.");

  m.def(
      "allocate_rotors",
      [](double T, double tau_phi, double tau_theta, double tau_psi) {
        const auto a = allocate_rotors({T, tau_phi, tau_theta, tau_psi}, RotorParams{});
        return py::make_tuple(a.omega_sq, a.saturated);
      },
      py::arg("thrust"), py::arg("tau_phi") = 0.0, py::arg("tau_theta") = 0.0, py::arg("tau_psi") = 0.0);
}
