#pragma once
// Reference implementations used by the unit and acceptance tests. They recompute everything
// from raw voxel states and share no code paths with the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <set>
#include <vector>

#include "lavatube/occupancy_map.hpp"
#include "lavatube/voxel.hpp"

namespace oracle {

using lavatube::IndexBox;
using lavatube::OccupancyMap;
using lavatube::Vec3;
using lavatube::VoxelKey;
using lavatube::VoxelState;

/// Applies the three frontier rules to every voxel of `box` from scratch.
inline std::set<VoxelKey> brute_force_frontiers(const OccupancyMap& m, const IndexBox& box,
                                                int n_req, const Vec3& pos, double r_known) {
  std::set<VoxelKey> out;
  for (std::size_t i = 0; i < box.volume(); ++i) {
    const VoxelKey k = box.unlinear(i);
    if (m.state(k) != VoxelState::Free) continue;
    if ((lavatube::center_of(k, m.resolution()) - pos).norm() < r_known) continue;
    int occupied = 0, unknown = 0;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const VoxelState s = m.state({k.x + dx, k.y + dy, k.z + dz});
          occupied += s == VoxelState::Occupied;
          unknown += s == VoxelState::Unknown;
        }
    if (occupied == 0 && unknown >= n_req) out.insert(k);
  }
  return out;
}

/// Voxels whose open box the segment a->b crosses with positive length (slab test per voxel).
inline std::set<VoxelKey> pierced_voxels(const Vec3& a, const Vec3& b, double res) {
  std::set<VoxelKey> out;
  const VoxelKey ka = lavatube::key_of(a, res), kb = lavatube::key_of(b, res);
  const VoxelKey lo{std::min(ka.x, kb.x) - 1, std::min(ka.y, kb.y) - 1, std::min(ka.z, kb.z) - 1};
  const VoxelKey hi{std::max(ka.x, kb.x) + 1, std::max(ka.y, kb.y) + 1, std::max(ka.z, kb.z) + 1};
  const Vec3 d = b - a;
  for (int x = lo.x; x <= hi.x; ++x)
    for (int y = lo.y; y <= hi.y; ++y)
      for (int z = lo.z; z <= hi.z; ++z) {
        const int idx[3] = {x, y, z};
        double t0 = 0.0, t1 = 1.0;
        bool ok = true;
        for (int axis = 0; axis < 3 && ok; ++axis) {
          const double vlo = idx[axis] * res, vhi = (idx[axis] + 1) * res;
          if (d[axis] == 0.0) {
            ok = a[axis] >= vlo && a[axis] < vhi;
          } else {
            double ta = (vlo - a[axis]) / d[axis], tb = (vhi - a[axis]) / d[axis];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
          }
        }
        if (ok && t0 < t1) out.insert({x, y, z});
      }
  return out;
}

/// Dense state grid with costs derived by exhaustive search. Call refresh() after editing `state`.
struct CostGrid {
  IndexBox box;
  std::vector<VoxelState> state;
  double c_occupied = 1e6, c_unknown = 2.0, c_risk = 4.0;
  int r_risk = 3;
  int inflation = 1;

  std::vector<int> nearest;  ///< Chebyshev distance to the nearest Occupied voxel, -1 if none

  VoxelState at(const VoxelKey& k) const { return state[box.linear(k)]; }

  /// Recomputes the distance field by pairing every voxel with every Occupied voxel.
  void refresh() {
    nearest.assign(box.volume(), -1);
    for (std::size_t j = 0; j < box.volume(); ++j) {
      if (state[j] != VoxelState::Occupied) continue;
      const VoxelKey o = box.unlinear(j);
      for (std::size_t i = 0; i < box.volume(); ++i) {
        const VoxelKey k = box.unlinear(i);
        const int d = std::max({std::abs(o.x - k.x), std::abs(o.y - k.y), std::abs(o.z - k.z)});
        if (nearest[i] < 0 || d < nearest[i]) nearest[i] = d;
      }
    }
  }

  int nearest_occupied(const VoxelKey& k) const { return nearest[box.linear(k)]; }

  double cost(const VoxelKey& k) const {
    const VoxelState s = at(k);
    if (s == VoxelState::Occupied) return c_occupied;
    double c = s == VoxelState::Unknown ? c_unknown : 1.0;
    const int d = nearest_occupied(k);
    if (d >= 0 && d < r_risk) c += c_risk / (d + 1.0);
    return c;
  }

  bool blocked(const VoxelKey& k) const {
    if (!box.contains(k)) return true;
    if (at(k) == VoxelState::Occupied) return true;
    const int d = nearest_occupied(k);
    return d >= 0 && d <= inflation;
  }
};

inline int64_t units(double c) { return static_cast<int64_t>(std::llround(c * 1e6)); }

/// Minimum sum of per-voxel costs over 26-connected paths from start to goal (start included).
/// Entered voxels must be unblocked; the goal must be Free. Returns -1 when no path exists.
inline int64_t dijkstra(const CostGrid& g, const VoxelKey& start, const VoxelKey& goal) {
  if (!g.box.contains(goal) || g.at(goal) != VoxelState::Free || g.blocked(goal)) return -1;
  const std::size_t n = g.box.volume();
  std::vector<int64_t> unit(n);
  std::vector<char> blk(n);
  for (std::size_t i = 0; i < n; ++i) {
    const VoxelKey k = g.box.unlinear(i);
    unit[i] = units(g.cost(k));
    blk[i] = g.blocked(k);
  }
  constexpr int64_t inf = std::numeric_limits<int64_t>::max();
  std::vector<int64_t> dist(n, inf);
  using Item = std::pair<int64_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const std::size_t s = g.box.linear(start);
  dist[s] = unit[s];
  pq.push({dist[s], s});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d != dist[u]) continue;
    const VoxelKey uk = g.box.unlinear(u);
    if (uk == goal) return d;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const VoxelKey v{uk.x + dx, uk.y + dy, uk.z + dz};
          if (!g.box.contains(v)) continue;
          const std::size_t vi = g.box.linear(v);
          if (blk[vi]) continue;
          if (d + unit[vi] < dist[vi]) {
            dist[vi] = d + unit[vi];
            pq.push({dist[vi], vi});
          }
        }
  }
  return -1;
}

/// Closed-form occupancy after a hit/miss sequence from a 0.5 prior: product of measurement odds.
inline double bayes_product(const std::vector<bool>& hits, double p_hit, double p_miss) {
  double odds = 1.0;
  for (bool h : hits) {
    const double p = h ? p_hit : p_miss;
    odds *= p / (1.0 - p);
  }
  return odds / (1.0 + odds);
}

}  // namespace oracle
