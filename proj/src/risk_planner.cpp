#include "lavatube/risk_planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace lavatube {

namespace {
constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
}

void RiskConfig::validate() const {
  if (!(c_unknown >= 1.0)) throw std::invalid_argument("risk.c_unknown must be >= 1");
  if (!(c_occupied > c_unknown)) throw std::invalid_argument("risk.c_occupied must exceed risk.c_unknown");
  if (!(c_risk > 0.0)) throw std::invalid_argument("risk.c_risk must be positive");
  if (r_risk < 1 || r_risk > 100) throw std::invalid_argument("risk.r_risk must lie in [1, 100]");
  if (!(vehicle_radius >= 0.0)) throw std::invalid_argument("risk.vehicle_radius must be >= 0");
}

double assign_cost(VoxelState state, int d, const RiskConfig& cfg) {
  double c = 1.0;
  if (state == VoxelState::Occupied) return cfg.c_occupied;
  if (state == VoxelState::Unknown) c = cfg.c_unknown;
  if (d >= 0 && d < cfg.r_risk) c += cfg.c_risk / (d + 1.0);
  return c;
}

RiskGrid::RiskGrid(IndexBox domain, double resolution, RiskConfig cfg)
    : domain_(domain), resolution_(resolution), cfg_(cfg) {
  cfg_.validate();
  if (!(resolution > 0.0)) throw std::invalid_argument("risk grid resolution must be positive");
  if (domain_.volume() == 0) throw std::invalid_argument("risk grid domain is empty");
  inflation_ = static_cast<int>(std::ceil(cfg_.vehicle_radius / resolution_ - 1e-9));
  cap_ = std::max(cfg_.r_risk, inflation_ + 1);
  if (cap_ > 250) throw std::invalid_argument("risk range or inflation too large for the grid");
  state_.assign(domain_.volume(), static_cast<uint8_t>(VoxelState::Unknown));
  dist_.assign(domain_.volume(), static_cast<uint8_t>(cap_));
  visit_.assign(domain_.volume(), 0);
  unit_table_.resize(3 * (cap_ + 1));
  for (int s = 0; s < 3; ++s)
    for (int d = 0; d <= cap_; ++d)
      unit_table_[s * (cap_ + 1) + d] =
          to_cost_units(assign_cost(static_cast<VoxelState>(s), d == cap_ ? kFarDistance : d, cfg_));
}

int RiskGrid::distance(const VoxelKey& k) const {
  if (!contains(k)) return kFarDistance;
  const int d = dist_[domain_.linear(k)];
  return d >= cap_ ? kFarDistance : d;
}

bool RiskGrid::blocked(const VoxelKey& k) const {
  if (!contains(k)) return true;
  const std::size_t i = domain_.linear(k);
  return state_[i] == static_cast<uint8_t>(VoxelState::Occupied) || dist_[i] <= inflation_;
}

int64_t RiskGrid::cost_units(const VoxelKey& k) const {
  if (!contains(k)) return to_cost_units(cfg_.c_occupied);
  const std::size_t i = domain_.linear(k);
  return unit_table_[state_[i] * (cap_ + 1) + dist_[i]];
}

double RiskGrid::cost(const VoxelKey& k) const {
  if (!contains(k)) return cfg_.c_occupied;
  const std::size_t i = domain_.linear(k);
  return assign_cost(static_cast<VoxelState>(state_[i]), dist_[i] >= cap_ ? kFarDistance : dist_[i], cfg_);
}

std::vector<VoxelKey> RiskGrid::set_states(const std::vector<std::pair<VoxelKey, VoxelState>>& updates) {
  const int reach = cap_ - 1;
  if (++visit_stamp_ == 0) {
    std::fill(visit_.begin(), visit_.end(), 0);
    visit_stamp_ = 1;
  }
  const auto for_ball = [&](const VoxelKey& c, int r, auto&& fn) {
    for (int dx = -r; dx <= r; ++dx)
      for (int dy = -r; dy <= r; ++dy)
        for (int dz = -r; dz <= r; ++dz) {
          const VoxelKey k = c + VoxelKey{dx, dy, dz};
          if (contains(k)) fn(k);
        }
  };

  struct Before {
    VoxelKey key;
    int64_t units;
    bool blocked;
  };
  std::vector<Before> affected;
  std::vector<VoxelKey> added;
  std::vector<VoxelKey> removed;
  for (const auto& [k, s] : updates) {
    if (!contains(k)) continue;
    const auto old = static_cast<VoxelState>(state_[domain_.linear(k)]);
    if (old == s) continue;
    for_ball(k, reach, [&](const VoxelKey& v) {
      uint32_t& mark = visit_[domain_.linear(v)];
      if (mark == visit_stamp_) return;
      mark = visit_stamp_;
      affected.push_back({v, cost_units(v), blocked(v)});
    });
    state_[domain_.linear(k)] = static_cast<uint8_t>(s);
    if (s == VoxelState::Occupied) added.push_back(k);
    else if (old == VoxelState::Occupied) removed.push_back(k);
  }

  for (const VoxelKey& o : added)
    for_ball(o, reach, [&](const VoxelKey& v) {
      uint8_t& d = d_at(v);
      d = static_cast<uint8_t>(std::min<int>(d, chebyshev(v, o)));
    });

  if (!removed.empty()) {
    ++visit_stamp_;
    if (visit_stamp_ == 0) visit_stamp_ = 1;
    for (const VoxelKey& o : removed)
      for_ball(o, reach, [&](const VoxelKey& v) {
        uint32_t& mark = visit_[domain_.linear(v)];
        if (mark == visit_stamp_) return;
        mark = visit_stamp_;
        int best = cap_;
        for_ball(v, reach, [&](const VoxelKey& w) {
          if (state_[domain_.linear(w)] == static_cast<uint8_t>(VoxelState::Occupied))
            best = std::min(best, chebyshev(v, w));
        });
        d_at(v) = static_cast<uint8_t>(best);
      });
  }

  std::vector<VoxelKey> changed;
  for (const Before& b : affected)
    if (cost_units(b.key) != b.units || blocked(b.key) != b.blocked) changed.push_back(b.key);
  std::sort(changed.begin(), changed.end());
  return changed;
}

std::vector<VoxelKey> RiskGrid::apply_changes(const OccupancyMap& map, const UpdatedCells& changed) {
  std::vector<std::pair<VoxelKey, VoxelState>> updates;
  updates.reserve(changed.size());
  for (const VoxelKey& k : changed)
    if (contains(k)) updates.emplace_back(k, map.state(k));
  return set_states(updates);
}

std::vector<VoxelKey> RiskGrid::sync(const OccupancyMap& map) {
  std::vector<std::pair<VoxelKey, VoxelState>> updates;
  for (const auto& [k, s] : map.known_voxels())
    if (contains(k)) updates.emplace_back(k, s);
  return set_states(updates);
}

RiskPlanner::RiskPlanner(const RiskGrid& grid) : grid_(grid), nodes_(grid.domain().volume()) {
  for (Node& n : nodes_) n = {kInf, kInf, 0, 0};
}

RiskPlanner::Node& RiskPlanner::node(std::size_t idx) {
  Node& n = nodes_[idx];
  if (n.stamp != stamp_) n = {kInf, kInf, stamp_, 0};
  return n;
}

int64_t RiskPlanner::heuristic(const VoxelKey& a, const VoxelKey& b) const {
  // Every move costs at least one Free voxel and shrinks the Chebyshev distance by at most one.
  return static_cast<int64_t>(chebyshev(a, b)) * kCostScale;
}

std::pair<int64_t, int64_t> RiskPlanner::calc_key(std::size_t idx) {
  const Node& n = node(idx);
  const int64_t m = std::min(n.g, n.rhs);
  if (m >= kInf) return {kInf, kInf};
  return {m + heuristic(start_, grid_.domain().unlinear(idx)) + km_, m};
}

void RiskPlanner::push(std::size_t idx) {
  const auto [k1, k2] = calc_key(idx);
  Node& n = node(idx);
  if (++next_seq_ == 0) next_seq_ = 1;
  n.seq = next_seq_;
  heap_.push_back({k1, k2, n.seq, static_cast<uint32_t>(idx)});
  std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
}

void RiskPlanner::update_vertex(std::size_t idx) {
  const IndexBox& dom = grid_.domain();
  const VoxelKey k = dom.unlinear(idx);
  Node& n = node(idx);
  if (idx != goal_idx_) {
    int64_t best = kInf;
    if (!grid_.blocked(k) || k == start_) {
      for (const VoxelKey& off : neighbor_offsets()) {
        const VoxelKey s = k + off;
        if (grid_.blocked(s)) continue;
        const Node& sn = node(dom.linear(s));
        if (sn.g >= kInf) continue;
        best = std::min(best, sn.g + grid_.cost_units(s));
      }
    }
    n.rhs = best;
  }
  if (n.g != n.rhs) push(idx);
  else n.seq = 0;
}

void RiskPlanner::compute_shortest_path() {
  const IndexBox& dom = grid_.domain();
  const std::size_t start_idx = dom.linear(start_);
  expansions_ = 0;
  while (true) {
    while (!heap_.empty() && node(heap_.front().idx).seq != heap_.front().seq) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
      heap_.pop_back();
    }
    if (heap_.empty()) break;
    const Entry top = heap_.front();
    const auto start_key = calc_key(start_idx);
    const Node& sn = node(start_idx);
    const bool top_below = top.k1 != start_key.first ? top.k1 < start_key.first : top.k2 < start_key.second;
    if (!top_below && sn.rhs == sn.g) break;

    std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
    heap_.pop_back();
    const std::size_t u = top.idx;
    const auto k_new = calc_key(u);
    if (std::make_pair(top.k1, top.k2) < k_new) {
      push(u);
      continue;
    }
    Node& un = node(u);
    un.seq = 0;
    ++expansions_;
    const VoxelKey uk = dom.unlinear(u);
    const bool enterable = !grid_.blocked(uk);
    if (un.g > un.rhs) {
      un.g = un.rhs;
    } else {
      un.g = kInf;
      update_vertex(u);
    }
    if (!enterable) continue;
    for (const VoxelKey& off : neighbor_offsets()) {
      const VoxelKey p = uk + off;
      if (dom.contains(p)) update_vertex(dom.linear(p));
    }
  }
}

bool RiskPlanner::goal_valid() const {
  return grid_.contains(goal_) && grid_.state(goal_) == VoxelState::Free && !grid_.blocked(goal_);
}

std::optional<PlannedPath> RiskPlanner::extract() {
  const IndexBox& dom = grid_.domain();
  if (node(dom.linear(start_)).g >= kInf) return std::nullopt;
  PlannedPath path;
  path.goal = goal_;
  VoxelKey cur = start_;
  path.keys.push_back(cur);
  path.total_units = grid_.cost_units(cur);
  const std::size_t limit = dom.volume();
  while (cur != goal_) {
    int64_t best = kInf;
    int best_len = 4;
    VoxelKey next{};
    for (const VoxelKey& off : neighbor_offsets()) {
      const VoxelKey s = cur + off;
      if (grid_.blocked(s)) continue;
      const Node& sn = node(dom.linear(s));
      if (sn.g >= kInf) continue;
      const int64_t c = sn.g + grid_.cost_units(s);
      // Among equal-cost successors prefer face moves, then edge moves.
      const int len = std::abs(off.x) + std::abs(off.y) + std::abs(off.z);
      if (c < best || (c == best && len < best_len)) {
        best = c;
        best_len = len;
        next = s;
      }
    }
    if (best >= kInf || path.keys.size() > limit) return std::nullopt;
    cur = next;
    path.keys.push_back(cur);
    path.total_units += grid_.cost_units(cur);
  }
  path.total_cost = static_cast<double>(path.total_units) / kCostScale;
  path.waypoints.reserve(path.keys.size());
  for (const VoxelKey& k : path.keys) path.waypoints.push_back(center_of(k, grid_.resolution()));
  return path;
}

std::optional<PlannedPath> RiskPlanner::plan(const VoxelKey& start, const VoxelKey& goal) {
  if (!grid_.contains(start)) throw std::invalid_argument("plan start lies outside the planning domain");
  if (grid_.state(start) == VoxelState::Occupied) throw std::invalid_argument("plan start voxel is Occupied");
  if (++stamp_ == 0) {
    for (Node& n : nodes_) n.stamp = 0;
    stamp_ = 1;
  }
  heap_.clear();
  km_ = 0;
  start_ = last_start_ = start;
  goal_ = goal;
  active_ = true;
  last_.reset();
  expansions_ = 0;
  searched_ = false;
  if (!goal_valid()) return std::nullopt;
  searched_ = true;
  goal_idx_ = grid_.domain().linear(goal);
  node(goal_idx_).rhs = 0;
  push(goal_idx_);
  compute_shortest_path();
  last_ = extract();
  return last_;
}

std::optional<PlannedPath> RiskPlanner::replan_on_update(const std::vector<VoxelKey>& cost_changed,
                                                         const VoxelKey& start) {
  if (!active_) throw std::logic_error("replan_on_update called before plan");
  if (!grid_.contains(start)) throw std::invalid_argument("plan start lies outside the planning domain");
  if (grid_.state(start) == VoxelState::Occupied) throw std::invalid_argument("plan start voxel is Occupied");
  if (cost_changed.empty() && start == start_) return last_;
  // The goal was invalid at plan time; start a fresh search once it is usable.
  if (!searched_) return plan(start, goal_);

  const IndexBox& dom = grid_.domain();
  if (start != start_) {
    km_ += heuristic(last_start_, start);
    const VoxelKey previous = start_;
    last_start_ = start_ = start;
    update_vertex(dom.linear(previous));
    update_vertex(dom.linear(start_));
  }
  for (const VoxelKey& v : cost_changed) {
    if (!dom.contains(v)) continue;
    update_vertex(dom.linear(v));
    for (const VoxelKey& off : neighbor_offsets()) {
      const VoxelKey p = v + off;
      if (dom.contains(p)) update_vertex(dom.linear(p));
    }
  }
  if (!goal_valid()) {
    last_.reset();
    return last_;
  }
  compute_shortest_path();
  last_ = extract();
  return last_;
}

Vec3 next_waypoint(const PlannedPath& path, const Vec3& position, double resolution,
                   std::size_t& cursor) {
  if (path.waypoints.empty()) throw std::invalid_argument("next_waypoint on an empty path");
  const double reach = 0.5 * resolution;
  cursor = std::min(cursor, path.waypoints.size() - 1);
  while (cursor + 1 < path.waypoints.size() && (path.waypoints[cursor] - position).norm() <= reach) ++cursor;
  return path.waypoints[cursor];
}

void write_path_csv(std::ostream& out, const PlannedPath& path, const RiskGrid& grid) {
  out << "idx,x,y,z,voxel_cost\n";
  for (std::size_t i = 0; i < path.keys.size(); ++i) {
    const Vec3& w = path.waypoints[i];
    out << i << ',' << w.x() << ',' << w.y() << ',' << w.z() << ',' << grid.cost(path.keys[i]) << '\n';
  }
}

}  // namespace lavatube
