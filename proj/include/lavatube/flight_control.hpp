#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "lavatube/voxel.hpp"

namespace lavatube {

/// Eight-state model in the yaw-compensated body frame.
struct McqState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double phi = 0.0;
  double theta = 0.0;
};

struct ControlInput {
  double T = 0.0;  ///< mass-less thrust, m/s^2
  double phi_ref = 0.0;
  double theta_ref = 0.0;
};

struct ModelParams {
  double g = 3.71;
  double A_x = 0.1;
  double A_y = 0.1;
  double A_z = 0.2;
  double K_phi = 1.0;
  double K_theta = 1.0;
  double tau_phi = 0.2;
  double tau_theta = 0.2;
  double dt = 0.05;

  void validate() const;
};

struct NmpcConfig {
  int N = 20;
  std::array<double, 8> W_x{6.0, 6.0, 8.0, 2.0, 2.0, 2.0, 0.5, 0.5};
  std::array<double, 3> W_u{0.5, 2.0, 2.0};
  std::array<double, 3> W_du{0.5, 20.0, 20.0};
  ControlInput u_min{0.0, -0.35, -0.35};
  ControlInput u_max{2.0 * 3.71, 0.35, 0.35};
  double dphi_max = 0.05;
  double dtheta_max = 0.05;
  double w_rate_penalty = 1e4;  ///< quadratic penalty on rate-bound excess inside the solver
  double v_cap = 0.0;           ///< m/s; 0 disables the soft speed penalty
  double w_v_cap = 50.0;
  int max_iters = 300;
  double tolerance = 1e-6;  ///< projected-gradient infinity norm

  void validate() const;
};

struct NmpcResult {
  std::vector<ControlInput> inputs;  ///< length N; inputs.front() is applied
  bool converged = false;            ///< false: best feasible iterate, stationarity not reached
  int iterations = 0;
  double cost = 0.0;
  double stationarity = 0.0;
};

/// One forward-Euler step. R(phi, theta) = Rot_y(theta) Rot_x(phi).
McqState dynamics_step(const McqState& x, const ControlInput& u, const ModelParams& params);

/// Flattened decision vector [T_0, phi_0, theta_0, T_1, ...].
using InputSequence = std::vector<double>;

/// Tracking cost over the Euler prediction: state terms for x_1..x_N, input and rate terms for
/// u_0..u_{N-1} with u_{-1} = u_prev, plus the rate and speed penalties.
double nmpc_cost(const McqState& x0, const McqState& x_ref, const ControlInput& u_prev,
                 const InputSequence& u, const NmpcConfig& cfg, const ModelParams& params);

/// Adjoint gradient of nmpc_cost with respect to `u`.
double nmpc_cost_gradient(const McqState& x0, const McqState& x_ref, const ControlInput& u_prev,
                          const InputSequence& u, const NmpcConfig& cfg, const ModelParams& params,
                          InputSequence& grad);

/// Spectral projected gradient on the input box with a penalty on rate-bound excess, followed by a
/// sequential clamp that makes every box and rate bound hold exactly. `warm_start` (length N) seeds
/// the iterate; otherwise u_prev is repeated.
/// Throws std::invalid_argument when u_prev lies further than one rate step outside the box.
NmpcResult nmpc_solve(const McqState& x0, const McqState& x_ref, const ControlInput& u_prev,
                      const NmpcConfig& cfg, const ModelParams& params,
                      const std::vector<ControlInput>* warm_start = nullptr);

struct RotorParams {
  double K_T = 0.60;
  double K_D = 0.20e-3;
  double d_arm = 0.3;   ///< m
  double J = 4.240e-4;  ///< kg m^2
  double k_t = 0.010e-3;

  void validate() const;
};

struct Wrench {
  double T = 0.0;
  double tau_phi = 0.0;
  double tau_theta = 0.0;
  double tau_psi = 0.0;
};

struct EnvParams {
  double rho = 0.017;         ///< kg/m^3
  double pressure = 720.0;    ///< Pa
  double temperature = 223.0; ///< K
  double R_gas = 188.90;
  double mu = 1.130e-5;
  double gamma = 1.289;
};

struct Allocation {
  std::array<double, 8> omega_sq{};
  bool saturated = false;  ///< some entry needed to go negative and was clamped at 0
};

/// 4x8 coaxial allocation matrix.
std::array<std::array<double, 8>, 4> allocation_matrix(const RotorParams& rp);
Wrench wrench_from_rotors(const std::array<double, 8>& omega_sq, const RotorParams& rp);
/// Minimum-norm right inverse, clamped at zero.
Allocation allocate_rotors(const Wrench& w, const RotorParams& rp);

struct MarsPresets {
  ModelParams model;
  RotorParams rotor;
  EnvParams env;
};
MarsPresets mars_presets();

struct ControlTraceRow {
  double t = 0.0;
  McqState x;
  ControlInput u;
  int solve_iters = 0;
};

/// CSV `t,px,py,pz,vx,vy,vz,phi,theta,T,phi_ref,theta_ref,solve_iters`.
void write_control_trace(std::ostream& out, const std::vector<ControlTraceRow>& rows);

}  // namespace lavatube
