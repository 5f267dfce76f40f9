#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lavatube/voxel.hpp"

namespace lavatube {

/// Ground-truth cave: a dense solid/free voxel grid. Keys outside `box` are empty space.
class WorldGeometry {
 public:
  WorldGeometry() = default;
  WorldGeometry(IndexBox box, double resolution, std::vector<uint8_t> solid, Pose spawn);

  const IndexBox& box() const { return box_; }
  double resolution() const { return resolution_; }
  const Pose& spawn() const { return spawn_; }
  Vec3 bounds_min() const;
  Vec3 bounds_max() const;

  bool is_solid(const VoxelKey& k) const {
    return box_.contains(k) && solid_[box_.linear(k)] != 0;
  }
  bool is_solid_at(const Vec3& p) const { return is_solid(key_of(p, resolution_)); }
  std::size_t solid_count() const;

  /// Free voxels 6-connected to `from` inside the box, sorted.
  std::vector<VoxelKey> reachable_free(const VoxelKey& from) const;

  /// Distance from `p` to the nearest solid voxel centre within `search_radius`; +inf if none.
  double clearance(const Vec3& p, double search_radius) const;

  friend bool operator==(const WorldGeometry& a, const WorldGeometry& b) {
    return a.box_ == b.box_ && a.resolution_ == b.resolution_ && a.solid_ == b.solid_ &&
           a.spawn_.position == b.spawn_.position && a.spawn_.yaw == b.spawn_.yaw;
  }

 private:
  IndexBox box_{};
  double resolution_ = 0.5;
  std::vector<uint8_t> solid_;
  Pose spawn_{};
};

/// Mutable grid used to assemble a WorldGeometry (tests, scenario construction).
class WorldBuilder {
 public:
  WorldBuilder(IndexBox box, double resolution, bool fill_solid = false);

  void set_solid(const VoxelKey& k, bool solid = true);
  /// Marks every voxel whose centre lies in the axis-aligned box [lo, hi].
  void fill_box(const Vec3& lo, const Vec3& hi, bool solid = true);
  void set_spawn(const Pose& spawn) { spawn_ = spawn; }
  WorldGeometry build() &&;

 private:
  IndexBox box_;
  double resolution_;
  std::vector<uint8_t> solid_;
  Pose spawn_{};
};

struct TubeParams {
  double length = 100.0;          ///< main passage centreline length (m)
  double radius_min = 1.75;       ///< m
  double radius_max = 2.75;       ///< m
  int branch_count = 1;           ///< long side passages
  double branch_length = 30.0;    ///< m
  int dead_end_count = 1;         ///< short blind side passages
  double dead_end_length = 12.0;  ///< m
  double roughness = 0.12;        ///< relative wall-radius modulation amplitude, [0, 0.5)
  double vertical_wander = 1.5;   ///< m, centreline height excursion
  double resolution = 0.5;        ///< m

  void validate() const;
};

/// Carves a connected network of tunnels from solid rock. Deterministic for a fixed seed.
/// Throws std::invalid_argument on non-positive dimensions or resolution.
WorldGeometry generate_tube(uint64_t seed, const TubeParams& params);

struct SensorSpec {
  double h_fov = 2.0 * 3.14159265358979323846;
  double v_fov = 30.0 * 3.14159265358979323846 / 180.0;
  int rings = 16;
  int rays_per_ring = 360;
  double max_range = 12.0;
  double noise_sigma = 0.0;

  void validate() const;
};

struct PointCloud {
  /// Positions relative to the sensor, in the yaw-aligned sensor frame.
  std::vector<Vec3> points;
  double stamp = 0.0;
};

/// Distance along a unit ray to the first solid voxel boundary, or nullopt when nothing is hit
/// within max_range. A ray starting inside a solid voxel hits at 0.
/// Throws std::invalid_argument when |direction| differs from 1 by more than 1e-9.
std::optional<double> cast_ray(const WorldGeometry& world, const Vec3& origin,
                               const Vec3& direction, double max_range);

/// Beam directions of the scanner in the sensor frame, ring-major.
std::vector<Vec3> beam_directions(const SensorSpec& spec);

/// One scan from `pose`; hits get Gaussian range noise truncated at 3 sigma, misses are dropped.
PointCloud simulate_lidar(const Pose& pose, const SensorSpec& spec, const WorldGeometry& world,
                          std::mt19937_64& rng, double stamp = 0.0);

/// Text format: header (resolution, bounds, spawn), then one `x y z` line per solid voxel.
/// `meta` entries are written as leading `# key=value` comment lines.
void write_world(std::ostream& out, const WorldGeometry& world,
                 const std::map<std::string, std::string>& meta = {});
WorldGeometry read_world(std::istream& in);

}  // namespace lavatube
