#pragma once

#include <numbers>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "lavatube/occupancy_map.hpp"
#include "lavatube/voxel.hpp"

namespace lavatube {

struct ExplorationConfig {
  int n_req = 5;                                  ///< unknown neighbours a frontier must border
  double r_known = 2.0;                           ///< m, sphere around the vehicle treated as known
  double theta_fov = std::numbers::pi / 2.0;      ///< rad, horizontal acceptance cone
  double h_r = 1.5;                               ///< m, max |height difference| for D
  double w_alpha = 1.0;
  double w_h = 1.0;
  double w_d = 1.0;

  /// `sensor_range` is the lidar range R; r_known must stay below it.
  void validate(double sensor_range) const;
};

struct Frontier {
  VoxelKey key;
  Vec3 position = Vec3::Zero();  ///< voxel centre, world frame
  double alpha = 0.0;            ///< rad, angle to the direction of travel
  double dist = 0.0;             ///< m
  double dh = 0.0;               ///< m, frontier height minus vehicle height
};

struct FrontierSets {
  std::vector<Frontier> direct;           ///< D: inside the forward cone and height band
  std::vector<Frontier> indirect;         ///< I: every other valid frontier
  std::vector<Frontier> global_leftover;  ///< unvisited I-frontiers carried across ticks
  std::set<VoxelKey> inaccessible;        ///< rejected by the planner
};

struct ExplorationComplete {};

struct CandidateSelection {
  Frontier frontier;
  bool repositioning = false;  ///< chosen by cost because D was empty
};

using SelectionResult = std::variant<CandidateSelection, ExplorationComplete>;

/// Map-only frontier rules: the voxel is Free, no 26-neighbour is Occupied, and at least n_req
/// neighbours are Unknown. Scanning stops at the first Occupied neighbour.
bool is_frontier_cell(const OccupancyMap& map, const VoxelKey& key, int n_req);

/// Changed Free voxels passing is_frontier_cell and lying at least r_known from the vehicle.
std::vector<Frontier> detect_frontiers(const OccupancyMap& map, const ExplorationConfig& cfg,
                                       const Vec3& vehicle_pos, const UpdatedCells& changed);

/// Persistent frontier set refreshed from each UpdatedCells batch. Only the changed voxels and
/// their 26-neighbourhoods are re-evaluated.
class FrontierTracker {
 public:
  explicit FrontierTracker(int n_req) : n_req_(n_req) {}

  void update(const OccupancyMap& map, const UpdatedCells& changed);
  const std::set<VoxelKey>& cells() const { return cells_; }
  bool contains(const VoxelKey& k) const { return cells_.count(k) != 0; }

  /// Tracked frontiers at least r_known from `vehicle_pos`, sorted by key.
  std::vector<Frontier> frontiers(const OccupancyMap& map, const ExplorationConfig& cfg,
                                  const Vec3& vehicle_pos) const;

 private:
  int n_req_;
  std::set<VoxelKey> cells_;
};

/// Normalised displacement; returns `previous` when the vehicle moved less than 1e-6 m.
Vec3 forward_direction(const Vec3& pos_prev, const Vec3& pos_now, const Vec3& previous);

/// Angle in [0, pi] between the frontier vector and the direction of travel.
/// Throws std::invalid_argument for a zero-length frontier vector.
double frontier_angle(const Vec3& p_f, const Vec3& v_fwd);

/// Fills alpha, dist and dh of a frontier at `key` relative to the vehicle.
Frontier make_frontier(const VoxelKey& key, double resolution, const Vec3& vehicle_pos,
                       const Vec3& v_fwd);

/// Splits frontiers into D (alpha <= theta/2 and |dh| <= h_r) and I. Keys in `inaccessible` are
/// dropped. The returned sets carry `inaccessible` forward.
FrontierSets classify_frontiers(const std::vector<Frontier>& frontiers, const Vec3& vehicle_pos,
                                const Vec3& v_fwd, const ExplorationConfig& cfg,
                                const std::set<VoxelKey>& inaccessible = {});

/// W_alpha * alpha + W_h * |dh| + W_d * dist.
double repositioning_cost(const Frontier& f, const ExplorationConfig& cfg);

/// Min-alpha over D; otherwise min-cost over I and the leftover set; otherwise complete.
/// Ties fall back to smaller dist, then key order.
SelectionResult select_candidate(const FrontierSets& sets, const ExplorationConfig& cfg);

/// Moves leftover frontiers that are valid again and inside the forward cone into D, drops
/// leftovers that no longer pass the detection rules, then records the current I in the leftover.
FrontierSets merge_global_frontiers(FrontierSets sets, const OccupancyMap& map,
                                    const Vec3& vehicle_pos, const Vec3& v_fwd,
                                    const ExplorationConfig& cfg);

/// Removes `key` from D, I and the leftover set and records it as inaccessible. A key held by
/// none of them leaves the sets untouched.
FrontierSets mark_inaccessible(FrontierSets sets, const VoxelKey& key);

}  // namespace lavatube
