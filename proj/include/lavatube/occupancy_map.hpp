#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lavatube/voxel.hpp"
#include "lavatube/world.hpp"

namespace lavatube {

enum class VoxelState : uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

const char* to_string(VoxelState s);

struct OccupancyConfig {
  double resolution = 0.5;
  double p_hit = 0.7;
  double p_miss = 0.4;
  double p_prior = 0.5;
  double clamp_min = 0.12;
  double clamp_max = 0.97;
  double max_integration_range = 12.0;
  /// Keys outside this box are never stored. Unbounded when empty.
  std::optional<IndexBox> bounds;

  void validate() const;
};

/// Voxels whose discrete state flipped in one integration, sorted and unique.
using UpdatedCells = std::vector<VoxelKey>;

/// Recursive Bayes update of a node's occupancy probability:
///   P(n|z_1:t) = [1 + (1-P(n|z_t))/P(n|z_t) * (1-P(n|z_1:t-1))/P(n|z_1:t-1) * P(n)/(1-P(n))]^-1
/// Throws std::invalid_argument unless every input lies strictly inside (0, 1).
double update_node_probability(double prior, double measurement_prob, double history_prob);

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double logistic(double l) { return 1.0 / (1.0 + std::exp(-l)); }

/// Probabilistic voxel map. Storage is a hash of 16^3 dense blocks; the observable behaviour is
/// that of an occupancy octree at a single leaf resolution.
class OccupancyMap {
 public:
  explicit OccupancyMap(OccupancyConfig cfg = {});
  OccupancyMap(const OccupancyMap& other);
  OccupancyMap& operator=(const OccupancyMap& other);
  OccupancyMap(OccupancyMap&&) noexcept = default;
  OccupancyMap& operator=(OccupancyMap&&) noexcept = default;

  const OccupancyConfig& config() const { return cfg_; }
  double resolution() const { return cfg_.resolution; }

  VoxelState state(const VoxelKey& key) const;
  std::optional<double> log_odds(const VoxelKey& key) const;
  std::optional<double> probability(const VoxelKey& key) const;

  /// Applies one hit or miss to `key` and returns whether its discrete state flipped.
  bool update_voxel(const VoxelKey& key, bool hit);
  /// Overwrites a voxel's log-odds (map import). Value is clamped.
  void set_log_odds(const VoxelKey& key, double log_odds);

  /// Integrates a scan taken at `sensor_pose`. Every voxel receives at most one update per scan;
  /// a voxel holding an endpoint is a hit even when other beams pass through it.
  UpdatedCells integrate_scan(const PointCloud& cloud, const Pose& sensor_pose);

  /// Count of voxels that are Free or Occupied.
  std::size_t known_count() const { return known_count_; }
  double explored_volume() const {
    return static_cast<double>(known_count_) * cfg_.resolution * cfg_.resolution * cfg_.resolution;
  }

  /// Every observed voxel, sorted by key.
  std::vector<std::pair<VoxelKey, VoxelState>> known_voxels() const;

  bool in_bounds(const VoxelKey& key) const { return !cfg_.bounds || cfg_.bounds->contains(key); }

 private:
  static constexpr int kShift = 4;
  static constexpr int kSide = 1 << kShift;
  static constexpr int kCells = kSide * kSide * kSide;

  struct Block {
    std::array<double, kCells> log_odds{};
    std::array<VoxelState, kCells> state{};
    std::array<uint32_t, kCells> mark{};
  };

  static VoxelKey block_of(const VoxelKey& k) { return {k.x >> kShift, k.y >> kShift, k.z >> kShift}; }
  static int cell_of(const VoxelKey& k) {
    return ((k.x & (kSide - 1)) << (2 * kShift)) | ((k.y & (kSide - 1)) << kShift) | (k.z & (kSide - 1));
  }
  const Block* find_block(const VoxelKey& key) const;
  Block& block_for(const VoxelKey& key);
  bool apply(Block& b, int cell, double delta);

  OccupancyConfig cfg_;
  double l_prior_;
  double l_min_;
  double l_max_;
  double l_hit_;
  double l_miss_;
  std::unordered_map<VoxelKey, std::unique_ptr<Block>, VoxelKeyHash> blocks_;
  std::size_t known_count_ = 0;
  uint32_t scan_id_ = 0;
  VoxelKey cached_key_{};
  Block* cached_block_ = nullptr;
};

/// `x y z state prob` per known voxel after a short header.
void write_map(std::ostream& out, const OccupancyMap& map,
               const std::map<std::string, std::string>& meta = {});
OccupancyMap read_map(std::istream& in, OccupancyConfig cfg = {});

}  // namespace lavatube
