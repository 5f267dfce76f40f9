#include "lavatube/occupancy_map.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lavatube {

const char* to_string(VoxelState s) {
  switch (s) {
    case VoxelState::Free: return "free";
    case VoxelState::Occupied: return "occupied";
    case VoxelState::Unknown: break;
  }
  return "unknown";
}

void OccupancyConfig::validate() const {
  if (!(resolution > 0.0)) throw std::invalid_argument("map.resolution must be positive");
  if (!(0.0 < p_miss && p_miss < p_prior && p_prior < p_hit && p_hit < 1.0))
    throw std::invalid_argument("map.p_miss, map.p_prior, map.p_hit must satisfy 0 < p_miss < p_prior < p_hit < 1");
  if (!(0.0 < clamp_min && clamp_min < p_prior && p_prior < clamp_max && clamp_max < 1.0))
    throw std::invalid_argument("map.clamp_min, map.clamp_max must satisfy 0 < clamp_min < p_prior < clamp_max < 1");
  if (!(max_integration_range > 0.0)) throw std::invalid_argument("map.max_integration_range must be positive");
}

double update_node_probability(double prior, double measurement_prob, double history_prob) {
  for (double p : {prior, measurement_prob, history_prob})
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probabilities must lie strictly inside (0, 1)");
  const double ratio = (1.0 - measurement_prob) / measurement_prob *
                       ((1.0 - history_prob) / history_prob) * (prior / (1.0 - prior));
  return 1.0 / (1.0 + ratio);
}

OccupancyMap::OccupancyMap(OccupancyConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  l_prior_ = logit(cfg_.p_prior);
  l_min_ = logit(cfg_.clamp_min);
  l_max_ = logit(cfg_.clamp_max);
  l_hit_ = logit(cfg_.p_hit) - l_prior_;
  l_miss_ = logit(cfg_.p_miss) - l_prior_;
}

OccupancyMap::OccupancyMap(const OccupancyMap& other)
    : cfg_(other.cfg_),
      l_prior_(other.l_prior_),
      l_min_(other.l_min_),
      l_max_(other.l_max_),
      l_hit_(other.l_hit_),
      l_miss_(other.l_miss_),
      known_count_(other.known_count_),
      scan_id_(other.scan_id_) {
  blocks_.reserve(other.blocks_.size());
  for (const auto& [k, b] : other.blocks_) blocks_.emplace(k, std::make_unique<Block>(*b));
}

OccupancyMap& OccupancyMap::operator=(const OccupancyMap& other) {
  if (this != &other) {
    OccupancyMap copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const OccupancyMap::Block* OccupancyMap::find_block(const VoxelKey& key) const {
  const auto it = blocks_.find(block_of(key));
  return it == blocks_.end() ? nullptr : it->second.get();
}

OccupancyMap::Block& OccupancyMap::block_for(const VoxelKey& key) {
  const VoxelKey bk = block_of(key);
  if (cached_block_ != nullptr && bk == cached_key_) return *cached_block_;
  auto& slot = blocks_[bk];
  if (!slot) slot = std::make_unique<Block>();
  cached_key_ = bk;
  cached_block_ = slot.get();
  return *slot;
}

VoxelState OccupancyMap::state(const VoxelKey& key) const {
  const Block* b = find_block(key);
  return b == nullptr ? VoxelState::Unknown : b->state[cell_of(key)];
}

std::optional<double> OccupancyMap::log_odds(const VoxelKey& key) const {
  const Block* b = find_block(key);
  if (b == nullptr || b->state[cell_of(key)] == VoxelState::Unknown) return std::nullopt;
  return b->log_odds[cell_of(key)];
}

std::optional<double> OccupancyMap::probability(const VoxelKey& key) const {
  const auto l = log_odds(key);
  if (!l) return std::nullopt;
  return logistic(*l);
}

bool OccupancyMap::apply(Block& b, int cell, double delta) {
  const VoxelState before = b.state[cell];
  double& l = b.log_odds[cell];
  if (before == VoxelState::Unknown) {
    l = l_prior_;
    ++known_count_;
  }
  l = std::clamp(l + delta, l_min_, l_max_);
  // Equality with the prior after an observation counts as Free.
  const VoxelState after = l > l_prior_ ? VoxelState::Occupied : VoxelState::Free;
  b.state[cell] = after;
  return after != before;
}

bool OccupancyMap::update_voxel(const VoxelKey& key, bool hit) {
  if (!in_bounds(key)) return false;
  return apply(block_for(key), cell_of(key), hit ? l_hit_ : l_miss_);
}

void OccupancyMap::set_log_odds(const VoxelKey& key, double value) {
  if (!in_bounds(key)) return;
  Block& b = block_for(key);
  const int cell = cell_of(key);
  if (b.state[cell] == VoxelState::Unknown) ++known_count_;
  b.log_odds[cell] = std::clamp(value, l_min_, l_max_);
  b.state[cell] = b.log_odds[cell] > l_prior_ ? VoxelState::Occupied : VoxelState::Free;
}

UpdatedCells OccupancyMap::integrate_scan(const PointCloud& cloud, const Pose& sensor_pose) {
  UpdatedCells changed;
  if (cloud.points.empty()) return changed;

  ++scan_id_;
  const uint32_t hit_mark = (scan_id_ << 1) | 1U;
  const uint32_t free_mark = scan_id_ << 1;
  const double res = cfg_.resolution;
  const Vec3& origin = sensor_pose.position;

  struct Beam {
    Vec3 end;
    bool hit;
  };
  std::vector<Beam> beams;
  beams.reserve(cloud.points.size());
  std::vector<VoxelKey> hits;
  for (const Vec3& p : cloud.points) {
    const double range = p.norm();
    const Vec3 dir_world = rotate_z(p, sensor_pose.yaw);
    if (range > cfg_.max_integration_range) {
      beams.push_back({origin + dir_world * (cfg_.max_integration_range / range), false});
      continue;
    }
    const Vec3 end = origin + dir_world;
    beams.push_back({end, true});
    const VoxelKey k = key_of(end, res);
    if (!in_bounds(k)) continue;
    uint32_t& m = block_for(k).mark[cell_of(k)];
    if (m != hit_mark) {
      m = hit_mark;
      hits.push_back(k);
    }
  }

  std::vector<VoxelKey> frees;
  for (const Beam& beam : beams) {
    const VoxelKey end_key = key_of(beam.end, res);
    walk_segment(origin, beam.end, res, [&](const VoxelKey& k) {
      if (beam.hit && k == end_key) return false;
      if (!in_bounds(k)) return true;
      uint32_t& m = block_for(k).mark[cell_of(k)];
      if (m != hit_mark && m != free_mark) {
        m = free_mark;
        frees.push_back(k);
      }
      return true;
    });
  }

  for (const VoxelKey& k : hits)
    if (apply(block_for(k), cell_of(k), l_hit_)) changed.push_back(k);
  for (const VoxelKey& k : frees)
    if (apply(block_for(k), cell_of(k), l_miss_)) changed.push_back(k);
  std::sort(changed.begin(), changed.end());
  return changed;
}

std::vector<std::pair<VoxelKey, VoxelState>> OccupancyMap::known_voxels() const {
  std::vector<std::pair<VoxelKey, VoxelState>> out;
  out.reserve(known_count_);
  for (const auto& [bk, b] : blocks_) {
    for (int cell = 0; cell < kCells; ++cell) {
      if (b->state[cell] == VoxelState::Unknown) continue;
      const VoxelKey k{(bk.x << kShift) | (cell >> (2 * kShift)),
                       (bk.y << kShift) | ((cell >> kShift) & (kSide - 1)),
                       (bk.z << kShift) | (cell & (kSide - 1))};
      out.emplace_back(k, b->state[cell]);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void write_map(std::ostream& out, const OccupancyMap& map,
               const std::map<std::string, std::string>& meta) {
  out << "# lavatube map v1\n";
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  out << std::setprecision(17);
  out << "resolution " << map.resolution() << '\n';
  for (const auto& [k, s] : map.known_voxels())
    out << k.x << ' ' << k.y << ' ' << k.z << ' ' << to_string(s) << ' ' << *map.probability(k) << '\n';
}

OccupancyMap read_map(std::istream& in, OccupancyConfig cfg) {
  std::string line;
  bool have_res = false;
  std::vector<std::pair<VoxelKey, double>> cells;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (line.rfind("resolution", 0) == 0) {
      std::string tag;
      have_res = static_cast<bool>(ls >> tag >> cfg.resolution);
      continue;
    }
    VoxelKey k;
    std::string state;
    double prob = 0.0;
    if (!(ls >> k.x >> k.y >> k.z >> state >> prob)) throw std::runtime_error("map file: malformed line '" + line + "'");
    if (!(prob > 0.0 && prob < 1.0)) throw std::runtime_error("map file: probability outside (0, 1)");
    if (state != "free" && state != "occupied") throw std::runtime_error("map file: bad state '" + state + "'");
    cells.emplace_back(k, prob);
  }
  if (!have_res) throw std::runtime_error("map file: missing resolution");
  OccupancyMap map(cfg);
  for (const auto& [k, p] : cells) map.set_log_odds(k, logit(p));
  return map;
}

}  // namespace lavatube
