#include "lavatube/flight_control.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace lavatube {

namespace {

using State8 = std::array<double, 8>;

State8 pack(const McqState& x) {
  return {x.p.x(), x.p.y(), x.p.z(), x.v.x(), x.v.y(), x.v.z(), x.phi, x.theta};
}

McqState unpack(const State8& s) {
  McqState x;
  x.p = Vec3(s[0], s[1], s[2]);
  x.v = Vec3(s[3], s[4], s[5]);
  x.phi = s[6];
  x.theta = s[7];
  return x;
}

State8 step8(const State8& s, double T, double phi_ref, double theta_ref, const ModelParams& m) {
  const double cphi = std::cos(s[6]), sphi = std::sin(s[6]);
  const double cth = std::cos(s[7]), sth = std::sin(s[7]);
  const double ax = T * cphi * sth - m.A_x * s[3];
  const double ay = -T * sphi - m.A_y * s[4];
  const double az = T * cphi * cth - m.g - m.A_z * s[5];
  const double dt = m.dt;
  return {s[0] + dt * s[3],
          s[1] + dt * s[4],
          s[2] + dt * s[5],
          s[3] + dt * ax,
          s[4] + dt * ay,
          s[5] + dt * az,
          s[6] + dt * (m.K_phi * phi_ref - s[6]) / m.tau_phi,
          s[7] + dt * (m.K_theta * theta_ref - s[7]) / m.tau_theta};
}

std::array<double, 3> lower(const NmpcConfig& c) { return {c.u_min.T, c.u_min.phi_ref, c.u_min.theta_ref}; }
std::array<double, 3> upper(const NmpcConfig& c) { return {c.u_max.T, c.u_max.phi_ref, c.u_max.theta_ref}; }

struct Evaluator {
  const McqState& x0;
  const McqState& x_ref;
  const ControlInput& u_prev;
  const NmpcConfig& cfg;
  const ModelParams& m;
  std::vector<State8> xs;

  double run(const InputSequence& u, InputSequence* grad) {
    const int N = cfg.N;
    const State8 xr = pack(x_ref);
    const std::array<double, 3> ur{m.g, 0.0, 0.0};
    const std::array<double, 3> up{u_prev.T, u_prev.phi_ref, u_prev.theta_ref};
    const std::array<double, 3> dmax{0.0, cfg.dphi_max, cfg.dtheta_max};
    const double vcap2 = cfg.v_cap * cfg.v_cap;

    xs.resize(static_cast<std::size_t>(N) + 1);
    xs[0] = pack(x0);
    for (int i = 0; i < N; ++i) xs[i + 1] = step8(xs[i], u[3 * i], u[3 * i + 1], u[3 * i + 2], m);

    double cost = 0.0;
    if (grad) grad->assign(u.size(), 0.0);

    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double du = u[3 * i + j] - ur[j];
        cost += cfg.W_u[j] * du * du;
        const double prev = i == 0 ? up[j] : u[3 * (i - 1) + j];
        const double dr = u[3 * i + j] - prev;
        cost += cfg.W_du[j] * dr * dr;
        double gdr = 2.0 * cfg.W_du[j] * dr;
        if (j > 0) {
          const double ex = std::abs(dr) - dmax[j];
          if (ex > 0.0) {
            cost += cfg.w_rate_penalty * ex * ex;
            gdr += 2.0 * cfg.w_rate_penalty * ex * (dr > 0.0 ? 1.0 : -1.0);
          }
        }
        if (grad) {
          (*grad)[3 * i + j] += 2.0 * cfg.W_u[j] * du + gdr;
          if (i > 0) (*grad)[3 * (i - 1) + j] -= gdr;
        }
      }
    }

    State8 lam{};
    for (int i = N; i >= 1; --i) {
      const State8& x = xs[i];
      State8 dl{};
      for (int j = 0; j < 8; ++j) {
        const double e = x[j] - xr[j];
        cost += cfg.W_x[j] * e * e;
        dl[j] = 2.0 * cfg.W_x[j] * e;
      }
      if (cfg.v_cap > 0.0) {
        const double e = x[3] * x[3] + x[4] * x[4] + x[5] * x[5] - vcap2;
        if (e > 0.0) {
          cost += cfg.w_v_cap * e * e;
          for (int j = 3; j < 6; ++j) dl[j] += 4.0 * cfg.w_v_cap * e * x[j];
        }
      }
      if (!grad) continue;
      // lam holds the adjoint of x_{i+1}; fold it back through the step x_i -> x_{i+1}.
      if (i < N) lam = backprop_state(xs[i], u, i, lam);
      for (int j = 0; j < 8; ++j) lam[j] += dl[j];
      // Input gradient of step i-1.
      const State8& xp = xs[i - 1];
      const int k = i - 1;
      const double cphi = std::cos(xp[6]), sphi = std::sin(xp[6]);
      const double cth = std::cos(xp[7]), sth = std::sin(xp[7]);
      (*grad)[3 * k] += m.dt * (lam[3] * cphi * sth - lam[4] * sphi + lam[5] * cphi * cth);
      (*grad)[3 * k + 1] += m.dt * m.K_phi / m.tau_phi * lam[6];
      (*grad)[3 * k + 2] += m.dt * m.K_theta / m.tau_theta * lam[7];
    }
    return cost;
  }

  /// Transposed state Jacobian of the step taken from x_i (with input u_i), applied to `lam`.
  State8 backprop_state(const State8& x, const InputSequence& u, int i, const State8& lam) const {
    const double T = u[3 * i];
    const double cphi = std::cos(x[6]), sphi = std::sin(x[6]);
    const double cth = std::cos(x[7]), sth = std::sin(x[7]);
    const double dt = m.dt;
    State8 out{};
    out[0] = lam[0];
    out[1] = lam[1];
    out[2] = lam[2];
    out[3] = dt * lam[0] + (1.0 - dt * m.A_x) * lam[3];
    out[4] = dt * lam[1] + (1.0 - dt * m.A_y) * lam[4];
    out[5] = dt * lam[2] + (1.0 - dt * m.A_z) * lam[5];
    out[6] = (1.0 - dt / m.tau_phi) * lam[6] +
             dt * (lam[3] * (-T * sphi * sth) + lam[4] * (-T * cphi) + lam[5] * (-T * sphi * cth));
    out[7] = (1.0 - dt / m.tau_theta) * lam[7] +
             dt * (lam[3] * (T * cphi * cth) + lam[5] * (-T * cphi * sth));
    return out;
  }
};

void project(InputSequence& u, const NmpcConfig& cfg) {
  const auto lo = lower(cfg);
  const auto hi = upper(cfg);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::clamp(u[i], lo[i % 3], hi[i % 3]);
}

double stationarity(const InputSequence& u, const InputSequence& g, const NmpcConfig& cfg) {
  const auto lo = lower(cfg);
  const auto hi = upper(cfg);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double pz = std::clamp(u[i] - g[i], lo[i % 3], hi[i % 3]);
    s = std::max(s, std::abs(pz - u[i]));
  }
  return s;
}

/// Clamps each angle into [prev - d, prev + d] intersected with the box, then nudges by ulps so the
/// difference evaluates within d in floating point.
void repair(InputSequence& u, const ControlInput& u_prev, const NmpcConfig& cfg) {
  const auto lo = lower(cfg);
  const auto hi = upper(cfg);
  const std::array<double, 3> dmax{0.0, cfg.dphi_max, cfg.dtheta_max};
  const std::size_t n = u.size() / 3;
  for (int j = 1; j < 3; ++j) {
    double prev = j == 1 ? u_prev.phi_ref : u_prev.theta_ref;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = u[3 * i + j];
      const double a = std::max(lo[j], prev - dmax[j]);
      const double b = std::min(hi[j], prev + dmax[j]);
      v = std::clamp(v, a, b);
      while (v - prev > dmax[j]) v = std::nextafter(v, -std::numeric_limits<double>::infinity());
      while (prev - v > dmax[j]) v = std::nextafter(v, std::numeric_limits<double>::infinity());
      v = std::clamp(v, lo[j], hi[j]);
      prev = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) u[3 * i] = std::clamp(u[3 * i], lo[0], hi[0]);
}

}  // namespace

void ModelParams::validate() const {
  if (!(g > 0.0)) throw std::invalid_argument("model.g must be positive");
  if (!(tau_phi > 0.0)) throw std::invalid_argument("model.tau_phi must be positive");
  if (!(tau_theta > 0.0)) throw std::invalid_argument("model.tau_theta must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("model.dt must be positive");
  if (A_x < 0.0 || A_y < 0.0 || A_z < 0.0) throw std::invalid_argument("model.A_x, model.A_y, model.A_z must be >= 0");
}

void NmpcConfig::validate() const {
  if (N < 1) throw std::invalid_argument("nmpc.N must be >= 1");
  for (double w : W_x)
    if (!(w >= 0.0)) throw std::invalid_argument("nmpc.W_x must be >= 0");
  for (double w : W_u)
    if (!(w >= 0.0)) throw std::invalid_argument("nmpc.W_u must be >= 0");
  for (double w : W_du)
    if (!(w >= 0.0)) throw std::invalid_argument("nmpc.W_du must be >= 0");
  if (!(u_min.T <= u_max.T) || !(u_min.phi_ref <= u_max.phi_ref) ||
      !(u_min.theta_ref <= u_max.theta_ref))
    throw std::invalid_argument("nmpc.u_min must not exceed nmpc.u_max");
  if (u_min.T < 0.0) throw std::invalid_argument("nmpc.u_min.T must be >= 0");
  if (!(dphi_max > 0.0) || !(dtheta_max > 0.0))
    throw std::invalid_argument("nmpc.dphi_max and nmpc.dtheta_max must be positive");
  if (!(w_rate_penalty >= 0.0) || !(w_v_cap >= 0.0) || !(v_cap >= 0.0))
    throw std::invalid_argument("nmpc.w_rate_penalty, nmpc.w_v_cap and nmpc.v_cap must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("nmpc.max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("nmpc.tolerance must be positive");
}

McqState dynamics_step(const McqState& x, const ControlInput& u, const ModelParams& params) {
  return unpack(step8(pack(x), u.T, u.phi_ref, u.theta_ref, params));
}

double nmpc_cost(const McqState& x0, const McqState& x_ref, const ControlInput& u_prev,
                 const InputSequence& u, const NmpcConfig& cfg, const ModelParams& params) {
  if (u.size() != static_cast<std::size_t>(3 * cfg.N))
    throw std::invalid_argument("input sequence length must be 3N");
  Evaluator ev{x0, x_ref, u_prev, cfg, params, {}};
  return ev.run(u, nullptr);
}

double nmpc_cost_gradient(const McqState& x0, const McqState& x_ref, const ControlInput& u_prev,
                          const InputSequence& u, const NmpcConfig& cfg, const ModelParams& params,
                          InputSequence& grad) {
  if (u.size() != static_cast<std::size_t>(3 * cfg.N))
    throw std::invalid_argument("input sequence length must be 3N");
  Evaluator ev{x0, x_ref, u_prev, cfg, params, {}};
  return ev.run(u, &grad);
}

NmpcResult nmpc_solve(const McqState& x0, const McqState& x_ref, const ControlInput& u_prev,
                      const NmpcConfig& cfg, const ModelParams& params,
                      const std::vector<ControlInput>* warm_start) {
  cfg.validate();
  params.validate();
  if (u_prev.phi_ref < cfg.u_min.phi_ref - cfg.dphi_max ||
      u_prev.phi_ref > cfg.u_max.phi_ref + cfg.dphi_max ||
      u_prev.theta_ref < cfg.u_min.theta_ref - cfg.dtheta_max ||
      u_prev.theta_ref > cfg.u_max.theta_ref + cfg.dtheta_max)
    throw std::invalid_argument("previous input is out of reach of the input box");

  const std::size_t n = static_cast<std::size_t>(cfg.N);
  InputSequence z(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const ControlInput& w =
        warm_start && warm_start->size() == n ? (*warm_start)[i] : u_prev;
    z[3 * i] = w.T;
    z[3 * i + 1] = w.phi_ref;
    z[3 * i + 2] = w.theta_ref;
  }
  project(z, cfg);

  Evaluator ev{x0, x_ref, u_prev, cfg, params, {}};
  InputSequence g, z_new(z.size()), g_new, d(z.size());
  double f = ev.run(z, &g);

  constexpr double kLamMin = 1e-10, kLamMax = 1e10, kGamma = 1e-4;
  constexpr std::size_t kMemory = 10;
  std::deque<double> history{f};

  NmpcResult res;
  double stat = stationarity(z, g, cfg);
  double lam = stat > 0.0 ? std::clamp(1.0 / stat, kLamMin, kLamMax) : 1.0;
  int it = 0;
  while (stat > cfg.tolerance && it < cfg.max_iters) {
    ++it;
    for (std::size_t i = 0; i < z.size(); ++i) d[i] = z[i] - lam * g[i];
    project(d, cfg);
    double gd = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      d[i] -= z[i];
      gd += g[i] * d[i];
    }
    const double f_ref = *std::max_element(history.begin(), history.end());
    double alpha = 1.0;
    double f_new = 0.0;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < z.size(); ++i) z_new[i] = z[i] + alpha * d[i];
      f_new = ev.run(z_new, &g_new);
      if (f_new <= f_ref + kGamma * alpha * gd) break;
      const double a_q = -0.5 * alpha * alpha * gd / (f_new - f - alpha * gd);
      alpha = (a_q >= 0.1 * alpha && a_q <= 0.9 * alpha) ? a_q : 0.5 * alpha;
    }
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double s = z_new[i] - z[i];
      ss += s * s;
      sy += s * (g_new[i] - g[i]);
    }
    lam = sy > 0.0 ? std::clamp(ss / sy, kLamMin, kLamMax) : kLamMax;
    if (ss == 0.0) break;
    z.swap(z_new);
    g.swap(g_new);
    f = f_new;
    history.push_back(f);
    if (history.size() > kMemory) history.pop_front();
    stat = stationarity(z, g, cfg);
  }

  res.iterations = it;
  res.stationarity = stat;
  res.converged = stat <= cfg.tolerance;
  repair(z, u_prev, cfg);
  res.cost = ev.run(z, nullptr);
  res.inputs.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.inputs[i] = {z[3 * i], z[3 * i + 1], z[3 * i + 2]};
  return res;
}

void RotorParams::validate() const {
  if (!(K_T > 0.0)) throw std::invalid_argument("rotor.K_T must be positive");
  if (!(K_D > 0.0)) throw std::invalid_argument("rotor.K_D must be positive");
  if (!(d_arm > 0.0)) throw std::invalid_argument("rotor.d_arm must be positive");
}

std::array<std::array<double, 8>, 4> allocation_matrix(const RotorParams& rp) {
  const double kt = rp.K_T, dk = rp.d_arm * rp.K_T, kd = rp.K_D;
  return {{{kt, kt, kt, kt, kt, kt, kt, kt},
           {0, 0, dk, dk, 0, 0, -dk, -dk},
           {dk, dk, 0, 0, -dk, -dk, 0, 0},
           {-kd, kd, -kd, kd, -kd, kd, -kd, kd}}};
}

Wrench wrench_from_rotors(const std::array<double, 8>& omega_sq, const RotorParams& rp) {
  const auto A = allocation_matrix(rp);
  std::array<double, 4> w{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 8; ++c) w[r] += A[r][c] * omega_sq[c];
  return {w[0], w[1], w[2], w[3]};
}

Allocation allocate_rotors(const Wrench& w, const RotorParams& rp) {
  rp.validate();
  // The rows of the matrix are mutually orthogonal, so A^+ w = sum_r a_r w_r / |a_r|^2.
  const auto A = allocation_matrix(rp);
  const std::array<double, 4> wv{w.T, w.tau_phi, w.tau_theta, w.tau_psi};
  Allocation out;
  double scale = 0.0;
  for (int r = 0; r < 4; ++r) {
    double n2 = 0.0;
    for (double a : A[r]) n2 += a * a;
    for (int c = 0; c < 8; ++c) out.omega_sq[c] += A[r][c] * wv[r] / n2;
  }
  for (double o : out.omega_sq) scale = std::max(scale, std::abs(o));
  const double tol = 1e-12 * std::max(scale, 1.0);
  for (double& o : out.omega_sq) {
    if (o < 0.0) {
      if (o < -tol) out.saturated = true;
      o = 0.0;
    }
  }
  return out;
}

MarsPresets mars_presets() { return {}; }

void write_control_trace(std::ostream& out, const std::vector<ControlTraceRow>& rows) {
  out << "t,px,py,pz,vx,vy,vz,phi,theta,T,phi_ref,theta_ref,solve_iters\n";
  out.precision(9);
  for (const auto& r : rows) {
    out << r.t << ',' << r.x.p.x() << ',' << r.x.p.y() << ',' << r.x.p.z() << ',' << r.x.v.x()
        << ',' << r.x.v.y() << ',' << r.x.v.z() << ',' << r.x.phi << ',' << r.x.theta << ','
        << r.u.T << ',' << r.u.phi_ref << ',' << r.u.theta_ref << ',' << r.solve_iters << '\n';
  }
}

}  // namespace lavatube
