#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta pair with FSAL and a PI step
// controller (Hairer, Norsett & Wanner, "Solving ODEs I", DOPRI5).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "fmpair/error.hpp"

namespace fmpair::ode {

struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-14;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

template <std::size_t N> using Vec = std::array<double, N>;

/// Integrates y' = rhs(t, y) from t0 to t1 in place.
///   max_step(t, y) -> upper bound on the next step
///   observe(t, y)  -> called after every accepted step (and once at t0)
template <std::size_t N, class Rhs, class MaxStep, class Observe>
Stats integrate(Rhs&& rhs, double t0, double t1, Vec<N>& y, Tolerance tol, MaxStep&& max_step, Observe&& observe) {
  // Butcher tableau
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04, expo = 0.2 - beta * 0.75;

  Stats st;
  Vec<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  auto axpy = [&](const Vec<N>& base, double h, auto... terms) {
    Vec<N> r = base;
    for (std::size_t i = 0; i < N; ++i) r[i] += h * ((terms.first * (*terms.second)[i]) + ...);
    return r;
  };
  auto pair = [](double c, const Vec<N>& k) { return std::pair<double, const Vec<N>*>(c, &k); };

  double t = t0;
  k1 = rhs(t, y);
  ++st.evaluations;
  observe(t, y);

  // initial step: crude guess bounded by the caller's limit
  double h = std::min(max_step(t, y), 1e-2 * std::abs(t1 - t0));
  double err_old = 1e-4;
  bool last_rejected = false;

  while (t < t1) {
    h = std::min(h, max_step(t, y));
    if (t + h > t1) h = t1 - t;
    if (h <= 1e-13 * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "dopri5: step size underflow (h = " << h << ") at t = " << t;
      throw StepUnderflow(os.str(), t);
    }

    ytmp = axpy(y, h, pair(a21, k1));
    k2 = rhs(t + c2 * h, ytmp);
    ytmp = axpy(y, h, pair(a31, k1), pair(a32, k2));
    k3 = rhs(t + c3 * h, ytmp);
    ytmp = axpy(y, h, pair(a41, k1), pair(a42, k2), pair(a43, k3));
    k4 = rhs(t + c4 * h, ytmp);
    ytmp = axpy(y, h, pair(a51, k1), pair(a52, k2), pair(a53, k3), pair(a54, k4));
    k5 = rhs(t + c5 * h, ytmp);
    ytmp = axpy(y, h, pair(a61, k1), pair(a62, k2), pair(a63, k3), pair(a64, k4), pair(a65, k5));
    k6 = rhs(t + h, ytmp);
    ynew = axpy(y, h, pair(a71, k1), pair(a73, k3), pair(a74, k4), pair(a75, k5), pair(a76, k6));
    k7 = rhs(t + h, ynew);
    st.evaluations += 6;

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / static_cast<double>(N));

    if (err <= 1.0) {
      double fac = err > 0.0 ? safety * std::pow(err, -expo) * std::pow(err_old, beta) : fac_max;
      fac = std::clamp(fac, fac_min, last_rejected ? 1.0 : fac_max);
      err_old = std::max(err, 1e-4);
      t += h;
      y = ynew;
      k1 = k7;
      ++st.accepted;
      last_rejected = false;
      observe(t, y);
      h *= fac;
    } else {
      h *= std::max(fac_min, safety * std::pow(err, -0.2));
      ++st.rejected;
      last_rejected = true;
    }
  }
  return st;
}

}  // namespace fmpair::ode
