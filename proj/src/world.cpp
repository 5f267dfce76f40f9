#include "lavatube/world.hpp"

#include <cmath>
#include <deque>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lavatube {

WorldGeometry::WorldGeometry(IndexBox box, double resolution, std::vector<uint8_t> solid,
                             Pose spawn)
    : box_(box), resolution_(resolution), solid_(std::move(solid)), spawn_(spawn) {
  if (resolution_ <= 0.0) throw std::invalid_argument("world resolution must be positive");
  if (solid_.size() != box_.volume()) throw std::invalid_argument("world grid size mismatch");
  if (is_solid_at(spawn_.position)) throw std::invalid_argument("world spawn lies in rock");
}

Vec3 WorldGeometry::bounds_min() const {
  return {box_.lo.x * resolution_, box_.lo.y * resolution_, box_.lo.z * resolution_};
}

Vec3 WorldGeometry::bounds_max() const {
  return {box_.hi.x * resolution_, box_.hi.y * resolution_, box_.hi.z * resolution_};
}

std::size_t WorldGeometry::solid_count() const {
  std::size_t n = 0;
  for (uint8_t s : solid_) n += s != 0;
  return n;
}

std::vector<VoxelKey> WorldGeometry::reachable_free(const VoxelKey& from) const {
  std::vector<VoxelKey> out;
  if (!box_.contains(from) || is_solid(from)) return out;
  std::vector<uint8_t> seen(solid_.size(), 0);
  std::deque<VoxelKey> queue{from};
  seen[box_.linear(from)] = 1;
  static constexpr VoxelKey kFaces[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                         {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!queue.empty()) {
    const VoxelKey k = queue.front();
    queue.pop_front();
    out.push_back(k);
    for (const VoxelKey& f : kFaces) {
      const VoxelKey n = k + f;
      if (!box_.contains(n)) continue;
      const std::size_t idx = box_.linear(n);
      if (seen[idx] || solid_[idx]) continue;
      seen[idx] = 1;
      queue.push_back(n);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double WorldGeometry::clearance(const Vec3& p, double search_radius) const {
  const VoxelKey c = key_of(p, resolution_);
  const int reach = static_cast<int>(std::ceil(search_radius / resolution_)) + 1;
  double best = std::numeric_limits<double>::infinity();
  for (int dx = -reach; dx <= reach; ++dx)
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dz = -reach; dz <= reach; ++dz) {
        const VoxelKey k = c + VoxelKey{dx, dy, dz};
        if (!is_solid(k)) continue;
        const double d = (center_of(k, resolution_) - p).norm();
        if (d <= search_radius) best = std::min(best, d);
      }
  return best;
}

WorldBuilder::WorldBuilder(IndexBox box, double resolution, bool fill_solid)
    : box_(box), resolution_(resolution), solid_(box.volume(), fill_solid ? 1 : 0) {
  if (resolution <= 0.0) throw std::invalid_argument("world resolution must be positive");
  if (box.volume() == 0) throw std::invalid_argument("world box is empty");
}

void WorldBuilder::set_solid(const VoxelKey& k, bool solid) {
  if (box_.contains(k)) solid_[box_.linear(k)] = solid ? 1 : 0;
}

void WorldBuilder::fill_box(const Vec3& lo, const Vec3& hi, bool solid) {
  const VoxelKey a = key_of(lo, resolution_);
  const VoxelKey b = key_of(hi, resolution_);
  for (int x = a.x; x <= b.x; ++x)
    for (int y = a.y; y <= b.y; ++y)
      for (int z = a.z; z <= b.z; ++z) {
        const VoxelKey k{x, y, z};
        const Vec3 c = center_of(k, resolution_);
        if ((c.array() >= lo.array()).all() && (c.array() <= hi.array()).all()) set_solid(k, solid);
      }
}

WorldGeometry WorldBuilder::build() && {
  return WorldGeometry(box_, resolution_, std::move(solid_), spawn_);
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Smooth lattice value noise in [-1, 1].
class ValueNoise {
 public:
  ValueNoise(uint64_t seed, double cell) : seed_(seed), inv_cell_(1.0 / cell) {}

  double operator()(const Vec3& p) const {
    const Vec3 q = p * inv_cell_;
    const double fx = std::floor(q.x()), fy = std::floor(q.y()), fz = std::floor(q.z());
    const auto ix = static_cast<int64_t>(fx), iy = static_cast<int64_t>(fy),
               iz = static_cast<int64_t>(fz);
    const double tx = smooth(q.x() - fx), ty = smooth(q.y() - fy), tz = smooth(q.z() - fz);
    double acc = 0.0;
    for (int c = 0; c < 8; ++c) {
      const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
      const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) * (dz ? tz : 1.0 - tz);
      acc += w * lattice(ix + dx, iy + dy, iz + dz);
    }
    return acc;
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  double lattice(int64_t x, int64_t y, int64_t z) const {
    uint64_t h = splitmix64(seed_ ^ static_cast<uint64_t>(x) * 0x8CB92BA72F3D8DD7ULL);
    h = splitmix64(h ^ static_cast<uint64_t>(y) * 0xD6E8FEB86659FD93ULL);
    h = splitmix64(h ^ static_cast<uint64_t>(z) * 0xA0761D6478BD642FULL);
    return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
  }

  uint64_t seed_;
  double inv_cell_;
};

struct CentreSample {
  Vec3 centre;
  double radius;
  double heading;
};

/// Random-walk centreline with mean-reverting heading, smoothly varying radius and height.
std::vector<CentreSample> walk_passage(const Vec3& start, double heading0, double length,
                                       const TubeParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double ds = p.resolution * 0.5;
  const auto steps = static_cast<int>(std::ceil(length / ds));

  double heading = heading0;
  double turn = 0.0;  // rad/m
  double radius = p.radius_min + (p.radius_max - p.radius_min) * unit(rng);
  double radius_goal = radius;
  double dz_goal = 0.0;
  double dz = 0.0;
  Vec3 pos = start;

  std::vector<CentreSample> out;
  out.reserve(steps + 1);
  out.push_back({pos, radius, heading});
  for (int i = 1; i <= steps; ++i) {
    const double s = i * ds;
    if (std::fmod(s, 8.0) < ds) radius_goal = p.radius_min + (p.radius_max - p.radius_min) * unit(rng);
    if (std::fmod(s, 10.0) < ds) dz_goal = p.vertical_wander * (2.0 * unit(rng) - 1.0);
    turn = 0.96 * turn + 0.012 * gauss(rng) - 0.004 * (heading - heading0);
    turn = std::clamp(turn, -0.08, 0.08);
    heading += turn * ds;
    radius += (radius_goal - radius) * 0.04;
    dz += (dz_goal - dz) * 0.02;
    pos.x() += ds * std::cos(heading);
    pos.y() += ds * std::sin(heading);
    pos.z() = start.z() + dz;
    out.push_back({pos, radius, heading});
  }
  return out;
}

}  // namespace

void TubeParams::validate() const {
  if (!(length > 0.0)) throw std::invalid_argument("world.length must be positive");
  if (!(resolution > 0.0)) throw std::invalid_argument("world.resolution must be positive");
  if (!(radius_min > 0.0) || radius_max < radius_min)
    throw std::invalid_argument("world.radius_min and world.radius_max must satisfy 0 < min <= max");
  if (branch_count < 0) throw std::invalid_argument("world.branch_count must be >= 0");
  if (dead_end_count < 0) throw std::invalid_argument("world.dead_end_count must be >= 0");
  if (branch_count > 0 && !(branch_length > 0.0)) throw std::invalid_argument("world.branch_length must be positive");
  if (dead_end_count > 0 && !(dead_end_length > 0.0))
    throw std::invalid_argument("world.dead_end_length must be positive");
  if (roughness < 0.0 || roughness >= 0.5) throw std::invalid_argument("world.roughness must lie in [0, 0.5)");
  if (vertical_wander < 0.0) throw std::invalid_argument("world.vertical_wander must be >= 0");
}

WorldGeometry generate_tube(uint64_t seed, const TubeParams& p) {
  p.validate();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<CentreSample>> passages;
  passages.push_back(walk_passage(Vec3::Zero(), 0.0, p.length, p, rng));
  const std::vector<CentreSample> main = passages.front();

  const int sides = p.branch_count + p.dead_end_count;
  for (int b = 0; b < sides; ++b) {
    const bool dead_end = b >= p.branch_count;
    const double frac = (b + 1.0) / (sides + 1.0) + 0.05 * (2.0 * unit(rng) - 1.0);
    const auto at = std::min(main.size() - 1,
                             static_cast<std::size_t>(std::clamp(frac, 0.15, 0.85) * (main.size() - 1)));
    const double side = (b % 2 == 0) ? 1.0 : -1.0;
    const double offset = (55.0 + 20.0 * unit(rng)) * std::numbers::pi / 180.0;
    passages.push_back(walk_passage(main[at].centre, main[at].heading + side * offset,
                                    dead_end ? p.dead_end_length : p.branch_length, p, rng));
  }

  const double reach = p.radius_max * (1.0 + p.roughness);
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& passage : passages)
    for (const auto& s : passage) {
      lo = lo.cwiseMin(s.centre);
      hi = hi.cwiseMax(s.centre);
    }
  const double margin = reach + 1.0;
  lo.array() -= margin;
  hi.array() += margin;
  const IndexBox box{key_of(lo, p.resolution), key_of(hi, p.resolution) + VoxelKey{1, 1, 1}};

  std::vector<uint8_t> solid(box.volume(), 1);
  const ValueNoise noise(splitmix64(seed ^ 0x5EEDULL), 2.5);
  for (const auto& passage : passages) {
    for (const auto& s : passage) {
      const double r_out = s.radius * (1.0 + p.roughness);
      const VoxelKey a = key_of(s.centre - Vec3::Constant(r_out), p.resolution);
      const VoxelKey b = key_of(s.centre + Vec3::Constant(r_out), p.resolution);
      for (int x = a.x; x <= b.x; ++x)
        for (int y = a.y; y <= b.y; ++y)
          for (int z = a.z; z <= b.z; ++z) {
            const VoxelKey k{x, y, z};
            if (!box.contains(k)) continue;
            const std::size_t idx = box.linear(k);
            if (!solid[idx]) continue;
            const Vec3 c = center_of(k, p.resolution);
            const double d2 = (c - s.centre).squaredNorm();
            if (d2 > r_out * r_out) continue;
            const double r = s.radius * (1.0 + p.roughness * noise(c));
            if (d2 < r * r) solid[idx] = 0;
          }
    }
  }

  const CentreSample& spawn_sample = main[std::min(main.size() - 1, static_cast<std::size_t>(3.0 / (0.5 * p.resolution)))];
  Pose spawn{center_of(key_of(spawn_sample.centre, p.resolution), p.resolution), spawn_sample.heading};
  solid[box.linear(key_of(spawn.position, p.resolution))] = 0;

  // Refill pockets the roughness may have disconnected from the spawn.
  WorldGeometry carved(box, p.resolution, solid, spawn);
  std::vector<uint8_t> connected(box.volume(), 1);
  for (const VoxelKey& k : carved.reachable_free(key_of(spawn.position, p.resolution)))
    connected[box.linear(k)] = 0;
  return WorldGeometry(box, p.resolution, std::move(connected), spawn);
}

void SensorSpec::validate() const {
  if (!(v_fov > 0.0 && v_fov <= std::numbers::pi)) throw std::invalid_argument("sensor.v_fov must lie in (0, pi]");
  if (!(h_fov > 0.0 && h_fov <= 2.0 * std::numbers::pi)) throw std::invalid_argument("sensor.h_fov must lie in (0, 2pi]");
  if (!(max_range > 0.0)) throw std::invalid_argument("sensor.max_range must be positive");
  if (rings < 1 || rays_per_ring < 1) throw std::invalid_argument("sensor.rings and sensor.rays_per_ring must be >= 1");
  if (noise_sigma < 0.0) throw std::invalid_argument("sensor.noise_sigma must be >= 0");
}

std::optional<double> cast_ray(const WorldGeometry& world, const Vec3& origin,
                               const Vec3& direction, double max_range) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw std::invalid_argument("cast_ray direction must be a unit vector");
  const double res = world.resolution();
  const IndexBox& box = world.box();

  // Clip the ray to the grid box (slab test); no solids exist outside it.
  const Vec3 lo = world.bounds_min();
  const Vec3 hi = world.bounds_max();
  double t_enter = 0.0;
  double t_exit = max_range;
  for (int a = 0; a < 3; ++a) {
    if (direction[a] == 0.0) {
      if (origin[a] < lo[a] || origin[a] >= hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (lo[a] - origin[a]) / direction[a];
    double t1 = (hi[a] - origin[a]) / direction[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return std::nullopt;

  const Vec3 start = origin + t_enter * direction;
  VoxelKey cur = key_of(start, res);
  // The entry point can land on the far face through round-off.
  cur.x = std::clamp(cur.x, box.lo.x, box.hi.x - 1);
  cur.y = std::clamp(cur.y, box.lo.y, box.hi.y - 1);
  cur.z = std::clamp(cur.z, box.lo.z, box.hi.z - 1);

  int step[3];
  double t_max[3];
  double t_delta[3];
  const int32_t idx[3] = {cur.x, cur.y, cur.z};
  for (int a = 0; a < 3; ++a) {
    if (direction[a] > 0.0) {
      step[a] = 1;
      t_max[a] = ((idx[a] + 1) * res - origin[a]) / direction[a];
      t_delta[a] = res / direction[a];
    } else if (direction[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (idx[a] * res - origin[a]) / direction[a];
      t_delta[a] = -res / direction[a];
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }

  double t_cur = t_enter;
  while (t_cur <= t_exit) {
    if (!box.contains(cur)) return std::nullopt;
    if (world.is_solid(cur)) return t_cur;
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    t_cur = t_max[a];
    if (a == 0) cur.x += step[0];
    else if (a == 1) cur.y += step[1];
    else cur.z += step[2];
    t_max[a] += t_delta[a];
  }
  return std::nullopt;
}

std::vector<Vec3> beam_directions(const SensorSpec& spec) {
  spec.validate();
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(spec.rings) * spec.rays_per_ring);
  const bool full_circle = spec.h_fov >= 2.0 * std::numbers::pi - 1e-12;
  for (int r = 0; r < spec.rings; ++r) {
    const double el = spec.rings == 1 ? 0.0 : -0.5 * spec.v_fov + r * spec.v_fov / (spec.rings - 1);
    for (int a = 0; a < spec.rays_per_ring; ++a) {
      double az;
      if (full_circle) az = -std::numbers::pi + a * (2.0 * std::numbers::pi / spec.rays_per_ring);
      else if (spec.rays_per_ring == 1) az = 0.0;
      else az = -0.5 * spec.h_fov + a * spec.h_fov / (spec.rays_per_ring - 1);
      dirs.emplace_back(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    }
  }
  return dirs;
}

PointCloud simulate_lidar(const Pose& pose, const SensorSpec& spec, const WorldGeometry& world,
                          std::mt19937_64& rng, double stamp) {
  PointCloud cloud;
  cloud.stamp = stamp;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const Vec3& d : beam_directions(spec)) {
    const Vec3 world_dir = rotate_z(d, pose.yaw).normalized();
    const auto hit = cast_ray(world, pose.position, world_dir, spec.max_range);
    if (!hit) continue;
    double range = *hit;
    if (spec.noise_sigma > 0.0) {
      range += spec.noise_sigma * std::clamp(gauss(rng), -3.0, 3.0);
      range = std::max(range, 0.0);
    }
    cloud.points.push_back(d * range);
  }
  return cloud;
}

void write_world(std::ostream& out, const WorldGeometry& world,
                 const std::map<std::string, std::string>& meta) {
  out << "# lavatube world v1\n";
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  const IndexBox& b = world.box();
  out.precision(17);
  out << "resolution " << world.resolution() << '\n';
  out << "bounds " << b.lo.x << ' ' << b.lo.y << ' ' << b.lo.z << ' ' << b.hi.x << ' ' << b.hi.y
      << ' ' << b.hi.z << '\n';
  const Pose& s = world.spawn();
  out << "spawn " << s.position.x() << ' ' << s.position.y() << ' ' << s.position.z() << ' '
      << s.yaw << '\n';
  out << "solid " << world.solid_count() << '\n';
  for (int x = b.lo.x; x < b.hi.x; ++x)
    for (int y = b.lo.y; y < b.hi.y; ++y)
      for (int z = b.lo.z; z < b.hi.z; ++z)
        if (world.is_solid({x, y, z})) out << x << ' ' << y << ' ' << z << '\n';
}

WorldGeometry read_world(std::istream& in) {
  double res = 0.0;
  IndexBox box{};
  Pose spawn{};
  std::size_t count = 0;
  bool have_res = false, have_bounds = false, have_spawn = false, have_solid = false;
  std::string line;
  while (!have_solid && std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "resolution") have_res = static_cast<bool>(ls >> res);
    else if (tag == "bounds")
      have_bounds = static_cast<bool>(ls >> box.lo.x >> box.lo.y >> box.lo.z >> box.hi.x >> box.hi.y >> box.hi.z);
    else if (tag == "spawn")
      have_spawn = static_cast<bool>(ls >> spawn.position.x() >> spawn.position.y() >> spawn.position.z() >> spawn.yaw);
    else if (tag == "solid") have_solid = static_cast<bool>(ls >> count);
    else throw std::runtime_error("world file: unexpected header line '" + line + "'");
  }
  if (!have_res || !have_bounds || !have_spawn || !have_solid)
    throw std::runtime_error("world file: incomplete header");
  if (box.volume() == 0) throw std::runtime_error("world file: empty bounds");
  std::vector<uint8_t> solid(box.volume(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    VoxelKey k;
    if (!(in >> k.x >> k.y >> k.z)) throw std::runtime_error("world file: truncated voxel list");
    if (!box.contains(k)) throw std::runtime_error("world file: voxel outside bounds");
    solid[box.linear(k)] = 1;
  }
  return WorldGeometry(box, res, std::move(solid), spawn);
}

}  // namespace lavatube
