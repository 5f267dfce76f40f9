#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace lavatube {

using Vec3 = Eigen::Vector3d;

/// Integer voxel index. Voxel (x, y, z) covers [x*res, (x+1)*res) on each axis.
struct VoxelKey {
  int32_t x = 0;
  int32_t y = 0;
  int32_t z = 0;

  friend constexpr bool operator==(const VoxelKey&, const VoxelKey&) = default;
  friend constexpr auto operator<=>(const VoxelKey&, const VoxelKey&) = default;

  constexpr VoxelKey operator+(const VoxelKey& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr VoxelKey operator-(const VoxelKey& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    // Large odd multipliers; keeps neighbouring keys apart in the table.
    uint64_t h = static_cast<uint32_t>(k.x) * 0x9E3779B185EBCA87ULL;
    h ^= static_cast<uint32_t>(k.y) * 0xC2B2AE3D27D4EB4FULL;
    h ^= static_cast<uint32_t>(k.z) * 0x165667B19E3779F9ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

inline VoxelKey key_of(const Vec3& p, double resolution) {
  return {static_cast<int32_t>(std::floor(p.x() / resolution)),
          static_cast<int32_t>(std::floor(p.y() / resolution)),
          static_cast<int32_t>(std::floor(p.z() / resolution))};
}

inline Vec3 center_of(const VoxelKey& k, double resolution) {
  return {(k.x + 0.5) * resolution, (k.y + 0.5) * resolution, (k.z + 0.5) * resolution};
}

inline int chebyshev(const VoxelKey& a, const VoxelKey& b) {
  const VoxelKey d = a - b;
  return std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)});
}

/// The 26 offsets of the 3x3x3 block around a voxel, in lexicographic order.
inline const std::array<VoxelKey, 26>& neighbor_offsets() {
  static const std::array<VoxelKey, 26> offsets = [] {
    std::array<VoxelKey, 26> out{};
    std::size_t n = 0;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz)
          if (dx != 0 || dy != 0 || dz != 0) out[n++] = {dx, dy, dz};
    return out;
  }();
  return offsets;
}

inline std::array<VoxelKey, 26> neighbors26(const VoxelKey& key) {
  std::array<VoxelKey, 26> out{};
  const auto& off = neighbor_offsets();
  for (std::size_t i = 0; i < off.size(); ++i) out[i] = key + off[i];
  return out;
}

/// Half-open integer box [lo, hi) of voxel keys.
struct IndexBox {
  VoxelKey lo;
  VoxelKey hi;

  bool contains(const VoxelKey& k) const {
    return k.x >= lo.x && k.y >= lo.y && k.z >= lo.z && k.x < hi.x && k.y < hi.y && k.z < hi.z;
  }
  int nx() const { return hi.x - lo.x; }
  int ny() const { return hi.y - lo.y; }
  int nz() const { return hi.z - lo.z; }
  std::size_t volume() const {
    if (nx() <= 0 || ny() <= 0 || nz() <= 0) return 0;
    return static_cast<std::size_t>(nx()) * ny() * nz();
  }
  /// Row-major linear index; caller guarantees contains(k).
  std::size_t linear(const VoxelKey& k) const {
    return (static_cast<std::size_t>(k.x - lo.x) * ny() + (k.y - lo.y)) * nz() + (k.z - lo.z);
  }
  VoxelKey unlinear(std::size_t idx) const {
    const int z = static_cast<int>(idx % nz());
    idx /= nz();
    const int y = static_cast<int>(idx % ny());
    const int x = static_cast<int>(idx / ny());
    return {lo.x + x, lo.y + y, lo.z + z};
  }
  friend bool operator==(const IndexBox&, const IndexBox&) = default;
};

/// Vehicle pose: position in the world frame and heading about +z.
struct Pose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

/// Rotation about +z applied to a vector.
inline Vec3 rotate_z(const Vec3& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

/// Visits every voxel pierced by the segment from `start` to `end`, in order, including the
/// voxels containing both endpoints. Amanatides-Woo traversal; the visitor returns false to stop.
template <typename Visitor>
void walk_segment(const Vec3& start, const Vec3& end, double resolution, Visitor&& visit) {
  VoxelKey cur = key_of(start, resolution);
  const VoxelKey last = key_of(end, resolution);
  if (!visit(cur)) return;
  if (cur == last) return;

  const Vec3 dir = end - start;
  int step[3];
  double t_max[3];
  double t_delta[3];
  const int32_t cur_idx[3] = {cur.x, cur.y, cur.z};
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) {
      step[a] = 1;
      t_max[a] = ((cur_idx[a] + 1) * resolution - start[a]) / dir[a];
      t_delta[a] = resolution / dir[a];
    } else if (dir[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (cur_idx[a] * resolution - start[a]) / dir[a];
      t_delta[a] = -resolution / dir[a];
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }
  // Bounded by the Manhattan distance between endpoint voxels; guards against round-off.
  const VoxelKey span = last - cur;
  int remaining = std::abs(span.x) + std::abs(span.y) + std::abs(span.z);
  while (remaining-- > 0) {
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    if (t_max[a] > 1.0) break;
    if (a == 0) cur.x += step[0];
    else if (a == 1) cur.y += step[1];
    else cur.z += step[2];
    t_max[a] += t_delta[a];
    if (!visit(cur)) return;
    if (cur == last) return;
  }
}

}  // namespace lavatube

template <>
struct std::hash<lavatube::VoxelKey> : lavatube::VoxelKeyHash {};
