#pragma once

#include <vector>

#include "lavatube/voxel.hpp"
#include "lavatube/world.hpp"

namespace lavatube {

struct ApfConfig {
  double r_f = 2.0;        ///< m, influence radius
  double l_rep = 1.0;      ///< repulsive constant L
  double f_max = 2.0;      ///< force magnitude cap
  double df_max = 0.5;     ///< per-tick cap on |F_t - F_{t-1}|
  double step_gain = 0.6;  ///< m, length of the normalised reference step

  void validate() const;
};

struct ForceState {
  Vec3 f_prev = Vec3::Zero();
};

/// Sum over points with |rho| <= r_F of L (1 - |rho|/r_F)^2 (-rho/|rho|). Points at the origin are
/// skipped.
Vec3 repulsive_force(const std::vector<Vec3>& points, const ApfConfig& cfg);

inline Vec3 attractive_force(const Vec3& waypoint, const Vec3& pose_est) { return waypoint - pose_est; }

struct ApfOutput {
  Vec3 reference = Vec3::Zero();
  Vec3 force = Vec3::Zero();  ///< total force after saturation and rate limiting
};

/// F = F_a + F_r, saturated to f_max, rate limited against state.f_prev, then normalised to
/// step_gain. A zero force holds position. `points` are relative to `pose_est` in the same frame
/// as the waypoint.
ApfOutput compute_reference(const Vec3& waypoint, const Vec3& pose_est,
                            const std::vector<Vec3>& points, ForceState& state,
                            const ApfConfig& cfg);

}  // namespace lavatube
