// lavatube: generate worlds, run exploration missions, replay traces, tabulate results.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lavatube/config.hpp"
#include "lavatube/mission.hpp"

namespace fs = std::filesystem;
using namespace lavatube;

namespace {

struct Common {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string world;
  std::optional<double> budget;
  std::optional<double> vmax;
};

MissionConfig resolve(const Common& o) {
  MissionConfig cfg = o.config.empty() ? parse_config("") : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.world.empty()) cfg.world_file = o.world;
  if (o.budget) cfg.budget_s = *o.budget;
  if (o.vmax) cfg.v_max = *o.vmax;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::map<std::string, std::string> meta_for(const MissionConfig& cfg) {
  return {{"seed", std::to_string(cfg.seed)}, {"config_hash", config_hash(cfg)}};
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".write_probe";
  std::ofstream f(probe);
  if (!f) throw std::runtime_error("output directory is not writable: " + dir.string());
  f.close();
  fs::remove(probe, ec);
}

/// `# key=value` header lines of an artifact.
std::map<std::string, std::string> read_meta(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing artifact " + p.string());
  std::map<std::string, std::string> meta;
  std::string line;
  while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
  }
  return meta;
}

/// Data rows of a CSV artifact (header and meta skipped), split on commas.
std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing artifact " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

int cmd_generate(const Common& o) {
  const MissionConfig cfg = resolve(o);
  const WorldGeometry w = make_world(cfg);
  fs::path out = o.out.empty() ? fs::path("world.txt") : fs::path(o.out);
  if (fs::is_directory(out)) out /= "world.txt";
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out.string());
  write_world(f, w, meta_for(cfg));
  const auto reach = w.reachable_free(key_of(w.spawn().position, w.resolution()));
  std::cout << "world " << out.string() << ": " << w.box().volume() << " voxels, " << reach.size()
            << " reachable free, seed " << cfg.seed << "\n";
  return 0;
}

int cmd_run(const Common& o) {
  const MissionConfig cfg = resolve(o);
  const fs::path dir = o.out.empty() ? fs::path("run") : fs::path(o.out);
  ensure_writable(dir);
  const auto meta = meta_for(cfg);
  {
    std::ofstream f(dir / "config.txt");
    for (const auto& [k, v] : meta) f << "# " << k << '=' << v << '\n';
    f << echo_config(cfg);
  }
  const WorldGeometry world = make_world(cfg);
  {
    std::ofstream f(dir / "world.txt");
    write_world(f, world, meta);
  }
  OccupancyMap map;
  const MissionReport r = run_mission(cfg, world, &map);
  write_report(dir, r, cfg, meta);
  {
    std::ofstream f(dir / "map.txt");
    write_map(f, map, meta);
  }
  std::cout << "outcome " << to_string(r.outcome) << " (" << r.stop_reason << ") after "
            << r.ticks * r.dt << " s; reachable known " << 100.0 * r.reachable_known_final
            << "%; artifacts in " << dir.string() << "\n";
  return r.outcome == MissionOutcome::Stuck ? 2 : 0;
}

struct Metrics {
  double volume = 0.0;
  double reachable_pct = 0.0;
  double distance = 0.0;
  double mean_speed = 0.0;
  double max_speed = 0.0;
  double hover = 0.0;
  std::size_t repositioning = 0;
};

/// Recomputes the trace metrics from trajectory.csv and writes the derived series to `out`.
Metrics metrics_from_trace(const fs::path& dir, double hover_speed, const fs::path* out,
                           const std::map<std::string, std::string>& meta) {
  const auto rows = read_rows(dir / "trajectory.csv");
  Metrics m;
  std::vector<double> t, v_fwd, dist;
  Vec3 prev = Vec3::Zero(), spawn = Vec3::Zero();
  std::size_t hover = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 8) throw std::runtime_error("malformed trajectory row");
    const Vec3 p(std::stod(r[1]), std::stod(r[2]), std::stod(r[3]));
    const Vec3 v(std::stod(r[4]), std::stod(r[5]), std::stod(r[6]));
    const double yaw = std::stod(r[7]);
    if (i == 0) {
      spawn = p;
      std::ifstream wf(dir / "world.txt");
      if (wf) spawn = read_world(wf).spawn().position;
    } else {
      m.distance += (p - prev).norm();
    }
    prev = p;
    const double s = v.norm();
    m.mean_speed += s;
    m.max_speed = std::max(m.max_speed, s);
    hover += s < hover_speed;
    t.push_back(std::stod(r[0]));
    v_fwd.push_back(v.dot(Vec3(std::cos(yaw), std::sin(yaw), 0.0)));
    dist.push_back((p - spawn).norm());
  }
  if (!rows.empty()) {
    m.mean_speed /= static_cast<double>(rows.size());
    m.hover = static_cast<double>(hover) / static_cast<double>(rows.size());
  }
  if (out) {
    const auto open = [&](const char* name) {
      std::ofstream f(*out / name);
      if (!f) throw std::runtime_error("cannot write " + (*out / name).string());
      f << std::setprecision(10);
      for (const auto& [k, v] : meta) f << "# " << k << '=' << v << '\n';
      return f;
    };
    auto fv = open("velocity.csv");
    fv << "t,v_forward\n";
    for (std::size_t i = 0; i < t.size(); ++i) fv << t[i] << ',' << v_fwd[i] << '\n';
    auto fa = open("acceleration.csv");
    fa << "t,a_forward\n";
    for (std::size_t i = 1; i < t.size(); ++i)
      fa << t[i] << ',' << (t[i] > t[i - 1] ? (v_fwd[i] - v_fwd[i - 1]) / (t[i] - t[i - 1]) : 0.0) << '\n';
    auto fd = open("distance.csv");
    fd << "t,distance_m\n";
    for (std::size_t i = 0; i < t.size(); ++i) fd << t[i] << ',' << dist[i] << '\n';
  }
  return m;
}

double hover_threshold(const fs::path& dir) {
  if (fs::exists(dir / "config.txt")) return load_config(dir / "config.txt").hover_speed;
  return MissionConfig{}.hover_speed;
}

int cmd_replay(const std::string& run_dir, const Common& o) {
  const fs::path dir(run_dir);
  const auto meta = read_meta(dir / "trajectory.csv");
  const fs::path out = o.out.empty() ? dir / "replay" : fs::path(o.out);
  ensure_writable(out);
  const Metrics m = metrics_from_trace(dir, hover_threshold(dir), &out, meta);
  std::cout << "replayed " << (dir / "trajectory.csv").string() << " into " << out.string()
            << ": distance " << m.distance << " m, mean speed " << m.mean_speed << " m/s, hover fraction "
            << m.hover << "\n";
  return 0;
}

Metrics load_metrics(const fs::path& dir) {
  std::ifstream js(dir / "summary.json");
  if (!js) throw std::runtime_error("missing artifact " + (dir / "summary.json").string());
  const nlohmann::json j = nlohmann::json::parse(js);
  const std::string seed = j.at("meta").at("seed"), hash = j.at("meta").at("config_hash");
  for (const char* name : {"volume.csv", "distance.csv", "velocity.csv", "acceleration.csv",
                           "trajectory.csv", "events.csv", "control.csv"}) {
    const auto meta = read_meta(dir / name);
    if (meta.count("seed") == 0 || meta.at("seed") != seed || meta.count("config_hash") == 0 ||
        meta.at("config_hash") != hash)
      throw std::runtime_error(std::string("artifact ") + (dir / name).string() +
                               " does not belong to this run (seed/config hash mismatch)");
  }
  Metrics m = metrics_from_trace(dir, hover_threshold(dir), nullptr, {});
  const auto vol = read_rows(dir / "volume.csv");
  m.volume = vol.empty() ? 0.0 : std::stod(vol.back()[1]);
  m.reachable_pct = 100.0 * j.at("reachable_known_final").get<double>();
  m.repositioning = read_rows(dir / "events.csv").size();
  return m;
}

int cmd_report(const std::vector<std::string>& dirs) {
  std::vector<Metrics> ms;
  for (const auto& d : dirs) ms.push_back(load_metrics(d));
  const auto row = [&](const char* label, auto get, int prec) {
    std::printf("%-28s", label);
    for (const Metrics& m : ms) std::printf("  %16.*f", prec, static_cast<double>(get(m)));
    std::printf("\n");
  };
  std::printf("%-28s", "metric");
  for (const auto& d : dirs) std::printf("  %16s", fs::path(d).filename().string().substr(0, 16).c_str());
  std::printf("\n");
  row("explored volume (m^3)", [](const Metrics& m) { return m.volume; }, 2);
  row("reachable volume known (%)", [](const Metrics& m) { return m.reachable_pct; }, 2);
  row("distance travelled (m)", [](const Metrics& m) { return m.distance; }, 2);
  row("mean speed (m/s)", [](const Metrics& m) { return m.mean_speed; }, 3);
  row("max speed (m/s)", [](const Metrics& m) { return m.max_speed; }, 3);
  row("hover fraction", [](const Metrics& m) { return m.hover; }, 4);
  row("repositioning events", [](const Metrics& m) { return static_cast<double>(m.repositioning); }, 0);
  return 0;
}

void add_common(CLI::App* app, Common& o, bool mission_flags) {
  app->add_option("--config", o.config, "flat key = value config file");
  app->add_option("--seed", o.seed, "overrides seed");
  app->add_option("--out", o.out, "output file or directory");
  if (mission_flags) {
    app->add_option("--world", o.world, "world file instead of the generator");
    app->add_option("--budget", o.budget, "mission budget (s)");
    app->add_option("--vmax", o.vmax, "speed limit (m/s)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lava tube exploration simulator"};
  app.require_subcommand(1);

  Common gen_opts, run_opts, replay_opts;
  auto* gen = app.add_subcommand("generate-world", "write a procedurally generated tube");
  add_common(gen, gen_opts, false);
  auto* run = app.add_subcommand("run", "run one exploration mission and export its metrics");
  add_common(run, run_opts, true);
  std::string replay_dir;
  auto* replay = app.add_subcommand("replay", "recompute metrics from a recorded trajectory");
  replay->add_option("dir", replay_dir, "run directory")->required();
  replay->add_option("--out", replay_opts.out, "output directory (default <dir>/replay)");
  std::vector<std::string> report_dirs;
  auto* report = app.add_subcommand("report", "summary table for one or more run directories");
  report->add_option("dirs", report_dirs, "run directories")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(gen_opts);
    if (*run) return cmd_run(run_opts);
    if (*replay) return cmd_replay(replay_dir, replay_opts);
    if (*report) return cmd_report(report_dirs);
  } catch (const std::exception& e) {
    std::cerr << "lavatube: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
