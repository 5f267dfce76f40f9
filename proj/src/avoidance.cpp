#include "lavatube/avoidance.hpp"

#include <stdexcept>

namespace lavatube {

void ApfConfig::validate() const {
  if (!(r_f > 0.0)) throw std::invalid_argument("apf.r_f must be positive");
  if (!(l_rep > 0.0)) throw std::invalid_argument("apf.l_rep must be positive");
  if (!(f_max > 0.0)) throw std::invalid_argument("apf.f_max must be positive");
  if (!(df_max > 0.0)) throw std::invalid_argument("apf.df_max must be positive");
  if (!(step_gain > 0.0)) throw std::invalid_argument("apf.step_gain must be positive");
}

Vec3 repulsive_force(const std::vector<Vec3>& points, const ApfConfig& cfg) {
  Vec3 f = Vec3::Zero();
  for (const Vec3& rho : points) {
    const double n = rho.norm();
    if (n == 0.0 || n > cfg.r_f) continue;
    const double s = 1.0 - n / cfg.r_f;
    f -= cfg.l_rep * s * s * (rho / n);
  }
  return f;
}

ApfOutput compute_reference(const Vec3& waypoint, const Vec3& pose_est,
                            const std::vector<Vec3>& points, ForceState& state,
                            const ApfConfig& cfg) {
  Vec3 f = attractive_force(waypoint, pose_est) + repulsive_force(points, cfg);
  const double mag = f.norm();
  if (mag > cfg.f_max) f *= cfg.f_max / mag;
  const Vec3 delta = f - state.f_prev;
  const double dmag = delta.norm();
  if (dmag > cfg.df_max) f = state.f_prev + delta * (cfg.df_max / dmag);
  state.f_prev = f;

  ApfOutput out;
  out.force = f;
  const double n = f.norm();
  out.reference = n > 0.0 ? Vec3(pose_est + f * (cfg.step_gain / n)) : pose_est;
  return out;
}

}  // namespace lavatube
