#include "lavatube/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace lavatube {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end)
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

template <std::size_t N>
std::array<double, N> parse_list(const std::string& key, const std::string& text) {
  std::array<double, N> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == N) throw ConfigError(key + ": expected " + std::to_string(N) + " values");
    out[n++] = parse_number<double>(key, trim(item));
  }
  if (n != N) throw ConfigError(key + ": expected " + std::to_string(N) + " values");
  return out;
}

template <std::size_t N>
std::string fmt_list(const std::array<double, N>& a) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) s += (i ? "," : "") + fmt(a[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<void(MissionConfig&, const std::string&)> set;
  std::function<std::string(const MissionConfig&)> get;
};

template <typename Member>
Field real(std::string key, Member m) {
  return {key,
          [m, key](MissionConfig& c, const std::string& v) { std::invoke(m, c) = parse_number<double>(key, v); },
          [m](const MissionConfig& c) { return fmt(std::invoke(m, c)); }};
}

template <typename Member>
Field integer(std::string key, Member m) {
  return {key,
          [m, key](MissionConfig& c, const std::string& v) { std::invoke(m, c) = parse_number<int>(key, v); },
          [m](const MissionConfig& c) { return std::to_string(std::invoke(m, c)); }};
}

template <std::size_t N, typename Member>
Field list(std::string key, Member m) {
  return {key,
          [m, key](MissionConfig& c, const std::string& v) { std::invoke(m, c) = parse_list<N>(key, v); },
          [m](const MissionConfig& c) { return fmt_list(std::invoke(m, c)); }};
}

template <typename Member>
Field input(std::string key, Member m) {
  return {key,
          [m, key](MissionConfig& c, const std::string& v) {
            const auto a = parse_list<3>(key, v);
            std::invoke(m, c) = ControlInput{a[0], a[1], a[2]};
          },
          [m](const MissionConfig& c) {
            const ControlInput& u = std::invoke(m, c);
            return fmt_list(std::array<double, 3>{u.T, u.phi_ref, u.theta_ref});
          }};
}

#define M(path) [](auto& c) -> auto& { return c.path; }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"seed", [](MissionConfig& c, const std::string& v) { c.seed = parse_number<uint64_t>("seed", v); },
       [](const MissionConfig& c) { return std::to_string(c.seed); }},
      real("budget_s", M(budget_s)),
      real("v_max", M(v_max)),
      real("loop_hz", M(loop_hz)),

      {"world.file", [](MissionConfig& c, const std::string& v) { c.world_file = v; },
       [](const MissionConfig& c) { return c.world_file; }},
      real("world.length", M(world.length)),
      real("world.radius_min", M(world.radius_min)),
      real("world.radius_max", M(world.radius_max)),
      integer("world.branch_count", M(world.branch_count)),
      real("world.branch_length", M(world.branch_length)),
      integer("world.dead_end_count", M(world.dead_end_count)),
      real("world.dead_end_length", M(world.dead_end_length)),
      real("world.roughness", M(world.roughness)),
      real("world.vertical_wander", M(world.vertical_wander)),
      real("world.resolution", M(world.resolution)),

      real("sensor.h_fov", M(sensor.h_fov)),
      real("sensor.v_fov", M(sensor.v_fov)),
      integer("sensor.rings", M(sensor.rings)),
      integer("sensor.rays_per_ring", M(sensor.rays_per_ring)),
      real("sensor.max_range", M(sensor.max_range)),
      real("sensor.noise_sigma", M(sensor.noise_sigma)),

      real("map.resolution", M(occupancy.resolution)),
      real("map.p_hit", M(occupancy.p_hit)),
      real("map.p_miss", M(occupancy.p_miss)),
      real("map.p_prior", M(occupancy.p_prior)),
      real("map.clamp_min", M(occupancy.clamp_min)),
      real("map.clamp_max", M(occupancy.clamp_max)),
      real("map.max_integration_range", M(occupancy.max_integration_range)),

      integer("explore.n_req", M(exploration.n_req)),
      real("explore.r_known", M(exploration.r_known)),
      real("explore.theta_fov", M(exploration.theta_fov)),
      real("explore.h_r", M(exploration.h_r)),
      real("explore.w_alpha", M(exploration.w_alpha)),
      real("explore.w_h", M(exploration.w_h)),
      real("explore.w_d", M(exploration.w_d)),

      real("risk.c_occupied", M(risk.c_occupied)),
      real("risk.c_unknown", M(risk.c_unknown)),
      real("risk.c_risk", M(risk.c_risk)),
      integer("risk.r_risk", M(risk.r_risk)),
      real("risk.vehicle_radius", M(risk.vehicle_radius)),

      real("apf.r_f", M(apf.r_f)),
      real("apf.l_rep", M(apf.l_rep)),
      real("apf.f_max", M(apf.f_max)),
      real("apf.df_max", M(apf.df_max)),
      real("apf.step_gain", M(apf.step_gain)),

      integer("nmpc.N", M(nmpc.N)),
      list<8>("nmpc.W_x", M(nmpc.W_x)),
      list<3>("nmpc.W_u", M(nmpc.W_u)),
      list<3>("nmpc.W_du", M(nmpc.W_du)),
      input("nmpc.u_min", M(nmpc.u_min)),
      input("nmpc.u_max", M(nmpc.u_max)),
      real("nmpc.dphi_max", M(nmpc.dphi_max)),
      real("nmpc.dtheta_max", M(nmpc.dtheta_max)),
      real("nmpc.w_rate_penalty", M(nmpc.w_rate_penalty)),
      real("nmpc.v_cap", M(nmpc.v_cap)),
      real("nmpc.w_v_cap", M(nmpc.w_v_cap)),
      integer("nmpc.max_iters", M(nmpc.max_iters)),
      real("nmpc.tolerance", M(nmpc.tolerance)),

      real("model.g", M(model.g)),
      real("model.A_x", M(model.A_x)),
      real("model.A_y", M(model.A_y)),
      real("model.A_z", M(model.A_z)),
      real("model.K_phi", M(model.K_phi)),
      real("model.K_theta", M(model.K_theta)),
      real("model.tau_phi", M(model.tau_phi)),
      real("model.tau_theta", M(model.tau_theta)),

      integer("mission.scan_every", M(scan_every)),
      real("mission.lookahead", M(lookahead)),
      real("mission.apf_cloud_res", M(apf_cloud_res)),
      real("mission.yaw_rate_max", M(yaw_rate_max)),
      real("mission.goal_timeout_s", M(goal_timeout_s)),
      real("mission.stuck_timeout_s", M(stuck_timeout_s)),
      real("mission.homing_timeout_s", M(homing_timeout_s)),
      real("mission.home_tolerance", M(home_tolerance)),
      real("mission.hover_speed", M(hover_speed)),
  };
  return f;
}

#undef M

const Field& field(const std::string& key) {
  for (const Field& f : fields())
    if (f.key == key) return f;
  throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

void set_config_value(MissionConfig& cfg, const std::string& key, const std::string& value) {
  field(key).set(cfg, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key);
  return out;
}

MissionConfig parse_config(const std::string& text) {
  MissionConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

MissionConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const MissionConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_hash(const MissionConfig& cfg) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : echo_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lavatube
