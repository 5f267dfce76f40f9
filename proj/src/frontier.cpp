#include "lavatube/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace lavatube {

void ExplorationConfig::validate(double sensor_range) const {
  if (n_req < 1 || n_req > 26) throw std::invalid_argument("explore.n_req must lie in [1, 26]");
  if (!(r_known >= 0.0) || !(r_known < sensor_range))
    throw std::invalid_argument("explore.r_known must satisfy 0 <= r_known < sensor range");
  if (!(theta_fov > 0.0 && theta_fov <= 2.0 * std::numbers::pi))
    throw std::invalid_argument("explore.theta_fov must lie in (0, 2pi]");
  if (!(h_r >= 0.0)) throw std::invalid_argument("explore.h_r must be >= 0");
  if (w_alpha < 0.0 || w_h < 0.0 || w_d < 0.0) throw std::invalid_argument("explore.w_alpha, explore.w_h, explore.w_d must be >= 0");
  if (w_alpha == 0.0 && w_h == 0.0 && w_d == 0.0)
    throw std::invalid_argument("explore.w_alpha, explore.w_h, explore.w_d must not all be zero");
}

bool is_frontier_cell(const OccupancyMap& map, const VoxelKey& key, int n_req) {
  if (map.state(key) != VoxelState::Free) return false;
  int unknown = 0;
  for (const VoxelKey& off : neighbor_offsets()) {
    const VoxelState s = map.state(key + off);
    if (s == VoxelState::Occupied) return false;
    if (s == VoxelState::Unknown) ++unknown;
  }
  return unknown >= n_req;
}

std::vector<Frontier> detect_frontiers(const OccupancyMap& map, const ExplorationConfig& cfg,
                                       const Vec3& vehicle_pos, const UpdatedCells& changed) {
  std::vector<Frontier> out;
  for (const VoxelKey& k : changed) {
    if (!is_frontier_cell(map, k, cfg.n_req)) continue;
    const Vec3 c = center_of(k, map.resolution());
    const double d = (c - vehicle_pos).norm();
    if (d < cfg.r_known) continue;
    Frontier f;
    f.key = k;
    f.position = c;
    f.dist = d;
    f.dh = c.z() - vehicle_pos.z();
    out.push_back(f);
  }
  std::sort(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) { return a.key < b.key; });
  out.erase(std::unique(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) { return a.key == b.key; }),
            out.end());
  return out;
}

void FrontierTracker::update(const OccupancyMap& map, const UpdatedCells& changed) {
  std::set<VoxelKey> touched;
  for (const VoxelKey& k : changed) {
    touched.insert(k);
    for (const VoxelKey& off : neighbor_offsets()) touched.insert(k + off);
  }
  for (const VoxelKey& k : touched) {
    if (is_frontier_cell(map, k, n_req_)) cells_.insert(k);
    else cells_.erase(k);
  }
}

std::vector<Frontier> FrontierTracker::frontiers(const OccupancyMap& map, const ExplorationConfig& cfg,
                                                 const Vec3& vehicle_pos) const {
  std::vector<Frontier> out;
  const double r2 = cfg.r_known * cfg.r_known;
  for (const VoxelKey& k : cells_) {
    const Vec3 c = center_of(k, map.resolution());
    const double d2 = (c - vehicle_pos).squaredNorm();
    if (d2 < r2) continue;
    Frontier f;
    f.key = k;
    f.position = c;
    f.dist = std::sqrt(d2);
    f.dh = c.z() - vehicle_pos.z();
    out.push_back(f);
  }
  return out;
}

Vec3 forward_direction(const Vec3& pos_prev, const Vec3& pos_now, const Vec3& previous) {
  const Vec3 d = pos_now - pos_prev;
  const double n = d.norm();
  if (n < 1e-6) return previous;
  return d / n;
}

double frontier_angle(const Vec3& p_f, const Vec3& v_fwd) {
  const double pn = p_f.norm();
  const double vn = v_fwd.norm();
  if (pn == 0.0) throw std::invalid_argument("frontier vector has zero length");
  if (vn == 0.0) throw std::invalid_argument("forward direction has zero length");
  return std::acos(std::clamp(p_f.dot(v_fwd) / (pn * vn), -1.0, 1.0));
}

Frontier make_frontier(const VoxelKey& key, double resolution, const Vec3& vehicle_pos,
                       const Vec3& v_fwd) {
  Frontier f;
  f.key = key;
  f.position = center_of(key, resolution);
  const Vec3 rel = f.position - vehicle_pos;
  f.dist = rel.norm();
  f.dh = rel.z();
  f.alpha = f.dist > 0.0 ? frontier_angle(rel, v_fwd) : 0.0;
  return f;
}

namespace {

bool in_direct_band(const Frontier& f, const ExplorationConfig& cfg) {
  return f.alpha <= 0.5 * cfg.theta_fov && std::abs(f.dh) <= cfg.h_r;
}

bool contains_key(const std::vector<Frontier>& v, const VoxelKey& k) {
  return std::any_of(v.begin(), v.end(), [&](const Frontier& f) { return f.key == k; });
}

void sort_by_key(std::vector<Frontier>& v) {
  std::sort(v.begin(), v.end(), [](const Frontier& a, const Frontier& b) { return a.key < b.key; });
}

}  // namespace

FrontierSets classify_frontiers(const std::vector<Frontier>& frontiers, const Vec3& vehicle_pos,
                                const Vec3& v_fwd, const ExplorationConfig& cfg,
                                const std::set<VoxelKey>& inaccessible) {
  FrontierSets sets;
  sets.inaccessible = inaccessible;
  for (Frontier f : frontiers) {
    if (inaccessible.count(f.key)) continue;
    const Vec3 rel = f.position - vehicle_pos;
    f.dist = rel.norm();
    f.dh = rel.z();
    if (f.dist == 0.0) continue;
    f.alpha = frontier_angle(rel, v_fwd);
    (in_direct_band(f, cfg) ? sets.direct : sets.indirect).push_back(f);
  }
  return sets;
}

double repositioning_cost(const Frontier& f, const ExplorationConfig& cfg) {
  return cfg.w_alpha * f.alpha + cfg.w_h * std::abs(f.dh) + cfg.w_d * f.dist;
}

SelectionResult select_candidate(const FrontierSets& sets, const ExplorationConfig& cfg) {
  const auto usable = [&](const Frontier& f) { return sets.inaccessible.count(f.key) == 0; };

  const Frontier* best = nullptr;
  for (const Frontier& f : sets.direct) {
    if (!usable(f)) continue;
    if (best == nullptr ||
        std::tie(f.alpha, f.dist, f.key) < std::tie(best->alpha, best->dist, best->key))
      best = &f;
  }
  if (best != nullptr) return CandidateSelection{*best, false};

  double best_cost = 0.0;
  for (const auto* group : {&sets.indirect, &sets.global_leftover}) {
    for (const Frontier& f : *group) {
      if (!usable(f)) continue;
      const double c = repositioning_cost(f, cfg);
      if (best == nullptr ||
          std::tie(c, f.dist, f.key) < std::tie(best_cost, best->dist, best->key)) {
        best = &f;
        best_cost = c;
      }
    }
  }
  if (best != nullptr) return CandidateSelection{*best, true};
  return ExplorationComplete{};
}

FrontierSets merge_global_frontiers(FrontierSets sets, const OccupancyMap& map,
                                    const Vec3& vehicle_pos, const Vec3& v_fwd,
                                    const ExplorationConfig& cfg) {
  std::vector<Frontier> kept;
  for (const Frontier& old : sets.global_leftover) {
    if (sets.inaccessible.count(old.key)) continue;
    if (!is_frontier_cell(map, old.key, cfg.n_req)) continue;
    const Frontier f = make_frontier(old.key, map.resolution(), vehicle_pos, v_fwd);
    if (f.dist < cfg.r_known) {
      kept.push_back(f);
      continue;
    }
    if (in_direct_band(f, cfg)) {
      if (!contains_key(sets.direct, f.key)) sets.direct.push_back(f);
      std::erase_if(sets.indirect, [&](const Frontier& g) { return g.key == f.key; });
      continue;
    }
    kept.push_back(f);
  }
  for (const Frontier& f : sets.indirect)
    if (!contains_key(kept, f.key)) kept.push_back(f);
  sort_by_key(kept);
  sets.global_leftover = std::move(kept);
  sort_by_key(sets.direct);
  return sets;
}

FrontierSets mark_inaccessible(FrontierSets sets, const VoxelKey& key) {
  const auto match = [&](const Frontier& f) { return f.key == key; };
  const auto removed = std::erase_if(sets.direct, match) + std::erase_if(sets.indirect, match) +
                       std::erase_if(sets.global_leftover, match);
  if (removed > 0) sets.inaccessible.insert(key);
  return sets;
}

}  // namespace lavatube
