#pragma once
// Closed-loop step-response harness and an independent PD reference controller.

#include <algorithm>
#include <cmath>
#include <functional>

#include "lavatube/flight_control.hpp"

namespace oracle {

struct StepResponse {
  double settle_time = -1.0;  ///< first time after which |p - p_ref| stays below the band; -1 if never
  double max_error_after = 0.0;
  bool rate_ok = true;
  bool box_ok = true;
  int solver_warnings = 0;
};

using Controller = std::function<lavatube::ControlInput(const lavatube::McqState&, const lavatube::ControlInput&, int&)>;

/// Runs `controller` on the Euler model from rest toward `p_ref` and measures settling.
inline StepResponse simulate_step(const Controller& controller, const lavatube::ModelParams& m,
                                  const lavatube::NmpcConfig& cfg, const lavatube::Vec3& p_ref,
                                  double horizon_s, double band) {
  StepResponse out;
  lavatube::McqState x;
  lavatube::ControlInput u{m.g, 0.0, 0.0};
  const int steps = static_cast<int>(std::lround(horizon_s / m.dt));
  double last_outside = 0.0;
  bool ever_inside = false;
  for (int k = 0; k < steps; ++k) {
    int warn = 0;
    const lavatube::ControlInput next = controller(x, u, warn);
    out.solver_warnings += warn;
    if (std::abs(next.phi_ref - u.phi_ref) > cfg.dphi_max || std::abs(next.theta_ref - u.theta_ref) > cfg.dtheta_max)
      out.rate_ok = false;
    if (next.T < cfg.u_min.T || next.T > cfg.u_max.T || next.phi_ref < cfg.u_min.phi_ref ||
        next.phi_ref > cfg.u_max.phi_ref || next.theta_ref < cfg.u_min.theta_ref ||
        next.theta_ref > cfg.u_max.theta_ref)
      out.box_ok = false;
    u = next;
    x = lavatube::dynamics_step(x, u, m);
    const double t = (k + 1) * m.dt;
    const double e = (x.p - p_ref).norm();
    if (e >= band) last_outside = t;
    else ever_inside = true;
  }
  if (ever_inside && last_outside < horizon_s) out.settle_time = last_outside;
  return out;
}

/// Cascaded PD on position with small-angle inversion, respecting the same input box and rates.
inline lavatube::ControlInput pd_control(const lavatube::McqState& x, const lavatube::ControlInput& u_prev,
                                         const lavatube::Vec3& p_ref, const lavatube::ModelParams& m,
                                         const lavatube::NmpcConfig& cfg) {
  const double kp = 1.2, kd = 1.8;
  const lavatube::Vec3 a = kp * (p_ref - x.p) - kd * x.v;
  lavatube::ControlInput u;
  const double theta_des = std::atan2(a.x(), m.g);
  const double phi_des = std::atan2(-a.y(), m.g);
  u.theta_ref = std::clamp(std::clamp(theta_des, cfg.u_min.theta_ref, cfg.u_max.theta_ref),
                           u_prev.theta_ref - cfg.dtheta_max, u_prev.theta_ref + cfg.dtheta_max);
  u.phi_ref = std::clamp(std::clamp(phi_des, cfg.u_min.phi_ref, cfg.u_max.phi_ref),
                         u_prev.phi_ref - cfg.dphi_max, u_prev.phi_ref + cfg.dphi_max);
  u.T = std::clamp((m.g + a.z() + m.A_z * x.v.z()) / (std::cos(x.phi) * std::cos(x.theta)), cfg.u_min.T, cfg.u_max.T);
  return u;
}

}  // namespace oracle
