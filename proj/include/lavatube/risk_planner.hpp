#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "lavatube/occupancy_map.hpp"
#include "lavatube/voxel.hpp"

namespace lavatube {

struct RiskConfig {
  double c_occupied = 1e6;      ///< C_o
  double c_unknown = 2.0;       ///< C_u
  double c_risk = 4.0;          ///< c_u, numerator of the proximity term
  int r_risk = 3;               ///< voxels
  double vehicle_radius = 0.3;  ///< m

  void validate() const;
};

/// Marker distance for voxels with no Occupied voxel in range.
inline constexpr int kFarDistance = std::numeric_limits<int>::max();

/// Per-voxel traversal cost: Free 1, Unknown C_u, Occupied C_o, plus c_u/(d+1) once when d < r_risk.
double assign_cost(VoxelState state, int d, const RiskConfig& cfg);

/// Costs are summed in fixed point so that path totals compare exactly.
inline constexpr int64_t kCostScale = 1'000'000;
inline int64_t to_cost_units(double cost) { return static_cast<int64_t>(std::llround(cost * kCostScale)); }

/// Dense traversal-cost layer over a fixed voxel domain, kept in sync with an occupancy map.
/// `d` is the Chebyshev (26-connected BFS) distance in voxels to the nearest Occupied voxel, exact
/// up to the risk and inflation range. Voxels within the inflation radius of an Occupied voxel,
/// and keys outside the domain, are blocked.
class RiskGrid {
 public:
  RiskGrid(IndexBox domain, double resolution, RiskConfig cfg);

  const IndexBox& domain() const { return domain_; }
  double resolution() const { return resolution_; }
  const RiskConfig& config() const { return cfg_; }
  int inflation_voxels() const { return inflation_; }

  bool contains(const VoxelKey& k) const { return domain_.contains(k); }
  VoxelState state(const VoxelKey& k) const {
    return contains(k) ? static_cast<VoxelState>(state_[domain_.linear(k)]) : VoxelState::Unknown;
  }
  /// kFarDistance when no Occupied voxel lies within range.
  int distance(const VoxelKey& k) const;
  bool blocked(const VoxelKey& k) const;
  double cost(const VoxelKey& k) const;
  int64_t cost_units(const VoxelKey& k) const;

  /// Sets the state of a batch of voxels and returns every key whose cost or blocked flag changed.
  std::vector<VoxelKey> set_states(const std::vector<std::pair<VoxelKey, VoxelState>>& updates);
  /// Pulls the states of `changed` from the map.
  std::vector<VoxelKey> apply_changes(const OccupancyMap& map, const UpdatedCells& changed);
  /// Pulls every known voxel of the map.
  std::vector<VoxelKey> sync(const OccupancyMap& map);

 private:
  uint8_t& d_at(const VoxelKey& k) { return dist_[domain_.linear(k)]; }

  IndexBox domain_;
  double resolution_;
  RiskConfig cfg_;
  int inflation_;
  int cap_;  ///< stored distances saturate here
  std::vector<uint8_t> state_;
  std::vector<uint8_t> dist_;
  std::vector<int64_t> unit_table_;  ///< [state * (cap+1) + d]
  std::vector<uint32_t> visit_;
  uint32_t visit_stamp_ = 0;
};

struct PlannedPath {
  std::vector<VoxelKey> keys;
  std::vector<Vec3> waypoints;  ///< voxel centres
  double total_cost = 0.0;      ///< sum of voxel costs over every waypoint, start included
  int64_t total_units = 0;
  VoxelKey goal;
};

/// Incremental D*-lite search over a RiskGrid (backward from the goal, 26-connected, cost of a move
/// is the cost of the voxel entered). The grid must outlive the planner; after mutating it, pass
/// the changed keys to replan_on_update.
class RiskPlanner {
 public:
  explicit RiskPlanner(const RiskGrid& grid);

  /// Fresh search. nullopt means the goal is inaccessible.
  /// Throws std::invalid_argument when the start voxel is Occupied or outside the domain.
  std::optional<PlannedPath> plan(const VoxelKey& start, const VoxelKey& goal);

  /// Repairs the previous search after cost changes and a possibly advanced start.
  std::optional<PlannedPath> replan_on_update(const std::vector<VoxelKey>& cost_changed,
                                              const VoxelKey& start);

  bool has_plan() const { return active_; }
  const VoxelKey& goal() const { return goal_; }
  std::size_t last_expansions() const { return expansions_; }

 private:
  struct Node {
    int64_t g;
    int64_t rhs;
    uint32_t stamp;
    uint32_t seq;
  };
  struct Entry {
    int64_t k1;
    int64_t k2;
    uint32_t seq;
    uint32_t idx;
    bool operator>(const Entry& o) const { return k1 != o.k1 ? k1 > o.k1 : k2 > o.k2; }
  };

  Node& node(std::size_t idx);
  int64_t heuristic(const VoxelKey& a, const VoxelKey& b) const;
  std::pair<int64_t, int64_t> calc_key(std::size_t idx);
  void push(std::size_t idx);
  void update_vertex(std::size_t idx);
  void compute_shortest_path();
  bool goal_valid() const;
  std::optional<PlannedPath> extract();

  const RiskGrid& grid_;
  std::vector<Node> nodes_;
  std::vector<Entry> heap_;
  uint32_t stamp_ = 0;
  uint32_t next_seq_ = 0;
  VoxelKey start_{};
  VoxelKey last_start_{};
  VoxelKey goal_{};
  std::size_t goal_idx_ = 0;
  int64_t km_ = 0;
  bool active_ = false;
  bool searched_ = false;
  std::optional<PlannedPath> last_;
  std::size_t expansions_ = 0;
};

/// First waypoint from `cursor` on that is not yet reached (within half a voxel); advances
/// `cursor` monotonically. Throws std::invalid_argument for an empty path.
Vec3 next_waypoint(const PlannedPath& path, const Vec3& position, double resolution,
                   std::size_t& cursor);

/// CSV `idx,x,y,z,voxel_cost`.
void write_path_csv(std::ostream& out, const PlannedPath& path, const RiskGrid& grid);

}  // namespace lavatube
