#pragma once

// Quantum Vlasov equation for one momentum mode of a spatially homogeneous
// field. The production path integrates the equivalent local system in
// (f, u, v); `oracle_direct` discretizes the non-Markovian integral form.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fmpair/dopri5.hpp"
#include "fmpair/error.hpp"
#include "fmpair/field.hpp"

namespace fmpair {

/// Canonical momentum (p_par along the field, |p_perp| transverse).
class Momentum {
 public:
  Momentum(double p_par, double p_perp = 0.0)
      : p_par_(p_par), p_perp_(std::abs(p_perp)), eps_perp_(std::sqrt(1.0 + p_perp * p_perp)) {}

  double p_par() const { return p_par_; }
  double p_perp() const { return p_perp_; }
  /// Transverse energy sqrt(m^2 + p_perp^2).
  double eps_perp() const { return eps_perp_; }

 private:
  double p_par_;
  double p_perp_;
  double eps_perp_;
};

struct KineticState {
  double t = 0.0;
  double f = 0.0;
  double u = 0.0;
  double v = 0.0;
};

struct Derivatives {
  double df = 0.0;
  double du = 0.0;
  double dv = 0.0;
};

/// Total energy Ω(p, t) = sqrt(ε_⊥² + (p_∥ - A(t))²) on the real axis.
inline double total_energy(const Field& field, const Momentum& mom, double t) {
  const double k = mom.p_par() - field.A(t);
  return std::sqrt(mom.eps_perp() * mom.eps_perp() + k * k);
}

/// Right-hand side of the (f, u, v) system:
///   f' = W u / 2,  u' = W (1 - 2f) - 2Ω v,  v' = 2Ω u,  W = E ε_⊥ / Ω².
inline Derivatives rhs(const Field& field, const Momentum& mom, const KineticState& s) {
  const double k = mom.p_par() - field.A(s.t);
  const double eps = mom.eps_perp();
  const double omega2 = eps * eps + k * k;
  const double omega = std::sqrt(omega2);
  const double w = field.E(s.t) * eps / omega2;
  return {0.5 * w * s.u, w * (1.0 - 2.0 * s.f) - 2.0 * omega * s.v, 2.0 * omega * s.u};
}

inline void validate(const ode::Tolerance& tol) {
  if (!(tol.rel >= 1e-12 && tol.rel <= 1e-6)) throw ConfigError("tolerance: rel must lie in [1e-12, 1e-6]");
  if (!(tol.abs >= 1e-16 && tol.abs <= 1e-8)) throw ConfigError("tolerance: abs must lie in [1e-16, 1e-8]");
}

struct ModeOptions {
  bool record_trajectory = false;
  /// Step bound as a fraction of the local oscillation period 2π / 2Ω.
  double period_fraction = 1.0 / 20.0;
  double plateau_fraction = 0.1;
  double plateau_tolerance = 1e-3;
};

struct ModeResult {
  double f = 0.0;             ///< f(p, +t_span)
  double f_min = 0.0;         ///< extremes along the trajectory (Pauli-bound checks)
  double f_max = 0.0;
  bool plateau_ok = true;     ///< trailing-window relative variation below tolerance
  double plateau_variation = 0.0;
  ode::Stats stats;
  std::vector<KineticState> trajectory;  ///< only when requested
  std::vector<std::string> warnings;
};

/// Integrates one mode from -t_span (vacuum initial state) to +t_span.
inline ModeResult integrate_mode(const Field& field, const Momentum& mom, const ode::Tolerance& tol = {},
                                 const ModeOptions& opt = {}) {
  validate(tol);
  const double T = field.config().half_window();
  const double plateau_start = T - opt.plateau_fraction * 2.0 * T;

  ModeResult res;
  res.f_min = std::numeric_limits<double>::infinity();
  res.f_max = -std::numeric_limits<double>::infinity();
  double tail_min = std::numeric_limits<double>::infinity();
  double tail_max = -std::numeric_limits<double>::infinity();

  ode::Vec<3> y{0.0, 0.0, 0.0};
  auto f = [&](double t, const ode::Vec<3>& s) {
    const Derivatives d = rhs(field, mom, {t, s[0], s[1], s[2]});
    return ode::Vec<3>{d.df, d.du, d.dv};
  };
  const double two_pi_frac = 2.0 * std::numbers::pi * opt.period_fraction;
  auto max_step = [&](double t, const ode::Vec<3>&) { return two_pi_frac / (2.0 * total_energy(field, mom, t)); };
  auto observe = [&](double t, const ode::Vec<3>& s) {
    res.f_min = std::min(res.f_min, s[0]);
    res.f_max = std::max(res.f_max, s[0]);
    if (t >= plateau_start) {
      tail_min = std::min(tail_min, s[0]);
      tail_max = std::max(tail_max, s[0]);
    }
    if (opt.record_trajectory) res.trajectory.push_back({t, s[0], s[1], s[2]});
  };

  res.stats = ode::integrate<3>(f, -T, T, y, tol, max_step, observe);
  res.f = y[0];
  if (res.f != 0.0) {
    res.plateau_variation = (tail_max - tail_min) / std::abs(res.f);
    res.plateau_ok = res.plateau_variation < opt.plateau_tolerance;
    if (!res.plateau_ok) {
      std::ostringstream os;
      os << "mode p_par=" << mom.p_par() << ": f not settled over the trailing window (relative variation "
         << res.plateau_variation << ")";
      res.warnings.push_back(os.str());
    }
  }
  return res;
}

/// Direct discretization of the integro-differential form
///   df/dt = W(t)/2 ∫_{t0}^{t} W(t') [1 - 2f(t')] cos(2 Θ(t', t)) dt'
/// on a uniform grid of n_steps intervals: trapezoid memory integral, Heun
/// step in time, Θ from a cumulative trapezoid of Ω. Cost O(n_steps²).
inline double oracle_direct(const Field& field, const Momentum& mom, std::size_t n_steps) {
  if (n_steps < 2) throw ConfigError("oracle_direct: need at least 2 steps");
  const double T = field.config().half_window();
  const double dt = 2.0 * T / static_cast<double>(n_steps);
  const std::size_t n = n_steps + 1;

  std::vector<double> w(n), theta(n), omega(n), c(n), s(n), f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -T + dt * static_cast<double>(i);
    omega[i] = total_energy(field, mom, t);
    w[i] = field.E(t) * mom.eps_perp() / (omega[i] * omega[i]);
  }
  theta[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) theta[i] = theta[i - 1] + 0.5 * dt * (omega[i - 1] + omega[i]);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::cos(2.0 * theta[i]);
    s[i] = std::sin(2.0 * theta[i]);
  }

  // Memory integral at node i over j < i (trapezoid weights, endpoint excluded);
  // cos(2Θ(t_j, t_i)) = cos 2θ_i cos 2θ_j + sin 2θ_i sin 2θ_j.
  auto memory_without_endpoint = [&](std::size_t i) {
    double mem = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double weight = j == 0 ? 0.5 : 1.0;
      mem += weight * w[j] * (1.0 - 2.0 * f[j]) * (c[i] * c[j] + s[i] * s[j]);
    }
    return mem;
  };

  double g = 0.0;  // df/dt at the current node
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double partial = memory_without_endpoint(i + 1);
    auto rate = [&](double f_next) { return 0.5 * w[i + 1] * dt * (partial + 0.5 * w[i + 1] * (1.0 - 2.0 * f_next)); };
    const double f_pred = f[i] + dt * g;
    const double g_pred = rate(f_pred);
    f[i + 1] = f[i] + 0.5 * dt * (g + g_pred);
    g = rate(f[i + 1]);
  }
  return f[n - 1];
}

}  // namespace fmpair
