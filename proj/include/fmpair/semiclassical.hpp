#pragma once

// Complex-time turning points Ω(p, t) = 0 and the phase-integral estimate
//   f ≈ Σ_p e^{-2K_p} + Σ_{p<p'} 2 cos(2θ_pp') (-1)^{p-p'} e^{-K_p - K_p'}
// with K_p = |∫_{t_p*}^{t_p} Ω dt| and θ_pp' = |∫_{Re t_p}^{Re t_p'} Ω dt|.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <type_traits>
#include <vector>

#include "fmpair/error.hpp"
#include "fmpair/field.hpp"
#include "fmpair/parallel.hpp"
#include "fmpair/quadrature.hpp"
#include "fmpair/qve.hpp"

namespace fmpair {

using cplx = std::complex<double>;
using cplx_l = std::complex<long double>;

/// Axis-aligned rectangle in the complex t plane.
struct ComplexBox {
  double re_min = -300.0;
  double re_max = 300.0;
  double im_min = 0.0;  ///< exclusive lower bound for root searches
  double im_max = 8.0;

  bool contains(cplx t) const {
    return t.real() >= re_min && t.real() <= re_max && t.imag() > im_min && t.imag() <= im_max;
  }

  /// Default search box: Re in [-3τ, 3τ], Im in (0, 8/m].
  static ComplexBox around(const FieldConfig& cfg) { return {-3.0 * cfg.tau, 3.0 * cfg.tau, 0.0, 8.0}; }
};

struct TurningPoint {
  cplx t;
  double residual = 0.0;  ///< |Ω(p, t)|
  double omega2 = 0.0;    ///< |Ω²(p, t)|
  int branch = 0;         ///< +1: k_par = +iε_⊥, -1: k_par = -iε_⊥
  double K = 0.0;
};

struct TurningPointSet {
  std::vector<TurningPoint> points;          ///< ascending Re t
  std::vector<std::vector<double>> thetas;   ///< thetas[i][j] = θ between points i and j
  ComplexBox search_box;
};

struct TurningOptions {
  double seeds_per_period = 6.0;  ///< along Re t, per carrier period 2π/ω (>= 4)
  int seed_rows = 8;              ///< along Im t
  double dedup_radius = 1e-4;
  double residual_bound = 1e-8;   ///< required |Ω| after polishing
  int max_iterations = 80;
  int action_panels = 32;         ///< Gauss-Legendre panels on the K contour
  unsigned workers = 1;
};

/// k_par(t) = p_par - A(t) continued into the complex plane (long double).
inline cplx_l kinetic_momentum(const Field& field, const Momentum& mom, cplx_l t) {
  return static_cast<long double>(mom.p_par()) - field.potential()(t);
}

/// Ω²(p, t) = (k - iε)(k + iε) in factored form.
inline cplx_l omega_squared(const Field& field, const Momentum& mom, cplx_l t) {
  const cplx_l k = kinetic_momentum(field, mom, t);
  const cplx_l ie(0.0L, static_cast<long double>(mom.eps_perp()));
  return (k - ie) * (k + ie);
}

namespace detail {

/// Newton on g(t) = k_par(t) - branch·iε_⊥ with g'(t) = E(t), in precision R.
/// Stops at the rounding floor. Returns nullopt on divergence or when the
/// iterate leaves the (slightly widened) box.
template <class R>
std::optional<std::complex<R>> newton(const Field& field, const Momentum& mom, std::complex<R> t, int branch,
                                      const ComplexBox& box, int max_iterations) {
  using C = std::complex<R>;
  const C target(R(0), branch * static_cast<R>(mom.eps_perp()));
  const double height = field.config().continuation_height;
  const R max_jump = std::numbers::pi_v<R> / static_cast<R>(field.config().omega);
  auto g_at = [&](C z) { return static_cast<R>(mom.p_par()) - field.potential()(z) - target; };

  C g = g_at(t);
  R best = std::abs(g);
  int stalled = 0;
  for (int it = 0; it < max_iterations; ++it) {
    const C d = eval_field(field.config(), t);
    if (std::abs(d) == R(0)) return std::nullopt;
    C step = g / d;
    if (std::abs(step) > max_jump) step *= max_jump / std::abs(step);
    const C next = t - step;
    if (!(next.imag() > R(0)) || static_cast<double>(next.imag()) > height ||
        next.real() < R(box.re_min) - 4 * max_jump || next.real() > R(box.re_max) + 4 * max_jump) {
      return std::nullopt;
    }
    t = next;
    g = g_at(t);
    const R a = std::abs(g);
    if (a == R(0)) break;
    if (a >= best) {
      if (++stalled >= 3) break;
    } else {
      stalled = 0;
      best = a;
    }
  }
  return t;
}

/// Long double polishing of a double-precision root.
inline std::optional<TurningPoint> polish_root(const Field& field, const Momentum& mom, cplx t0, int branch,
                                               const ComplexBox& box, const TurningOptions& opt) {
  const auto fine = newton<long double>(field, mom, cplx_l(t0.real(), t0.imag()), branch, box, 12);
  if (!fine) return std::nullopt;
  TurningPoint tp;
  tp.t = cplx(static_cast<double>(fine->real()), static_cast<double>(fine->imag()));
  tp.omega2 = static_cast<double>(std::abs(omega_squared(field, mom, *fine)));
  tp.residual = std::sqrt(tp.omega2);
  tp.branch = branch;
  if (!(tp.residual < opt.residual_bound) || !box.contains(tp.t)) return std::nullopt;
  return tp;
}

}  // namespace detail

/// Action K = |∫_{t*}^{t} Ω dt| along the vertical line Re t = const. With Ω
/// continued from its positive real-axis value, Ω(x - is) = conj Ω(x + is), so
/// K = 2 |∫_0^y Re Ω(x + is) ds|. The substitution s = y (1 - w²) removes the
/// square-root endpoint singularity.
inline double action_K(const Field& field, const Momentum& mom, const TurningPoint& tp, int panels = 32) {
  if (!(tp.t.imag() > 0.0)) throw ConfigError("action_K: turning point must lie in the upper half plane");
  const long double x = tp.t.real();
  const long double y = tp.t.imag();

  using Rule = boost::math::quadrature::gauss<long double, 10>;
  struct Node {
    long double w;
    long double weight;
  };
  std::vector<Node> nodes;
  const long double width = 1.0L / panels;
  for (int k = 0; k < panels; ++k) {
    const long double mid = width * (k + 0.5L);
    const long double half = width / 2;
    for (std::size_t j = 0; j < Rule::abscissa().size(); ++j) {
      const long double a = Rule::abscissa()[j];
      const long double wt = Rule::weights()[j] * half;
      nodes.push_back({mid + half * a, wt});
      if (a != 0.0L) nodes.push_back({mid - half * a, wt});
    }
  }
  // from the real axis (w = 1) up to the root (w = 0)
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.w > b.w; });

  const cplx_l start = std::sqrt(omega_squared(field, mom, cplx_l(x, 0.0L)));
  cplx_l prev = start;
  cplx_l prev2 = start;
  bool have_two = false;
  long double sum = 0.0L;
  for (const auto& n : nodes) {
    const long double s = y * (1.0L - n.w * n.w);
    const cplx_l root = std::sqrt(omega_squared(field, mom, cplx_l(x, s)));
    const cplx_l guess = have_two ? prev + (prev - prev2) * 0.5L : prev;
    const long double d_plus = std::abs(root - guess);
    const long double d_minus = std::abs(-root - guess);
    const cplx_l pick = d_plus <= d_minus ? root : -root;
    const long double near = std::min(d_plus, d_minus);
    const long double far = std::max(d_plus, d_minus);
    if (far > 0.0L && near > 0.5L * far) {
      std::ostringstream os;
      os << "action_K: square-root branch lost at Im t = " << static_cast<double>(s) << " on Re t = "
         << static_cast<double>(x);
      throw NumericalError(os.str());
    }
    sum += n.weight * pick.real() * 2.0L * y * n.w;
    prev2 = prev;
    prev = pick;
    have_two = true;
  }
  return static_cast<double>(2.0L * std::abs(sum));
}

/// Cumulative phase Θ(x) = ∫_{x0}^{x} Ω dt on the real axis.
inline double real_axis_phase(const Field& field, const Momentum& mom, double from, double to) {
  if (from == to) return 0.0;
  auto omega = [&](double t) { return total_energy(field, mom, t); };
  // A is C1 between grid nodes, so GK converges slowly past ~1e-12 relative
  return quad::integrate<double>(omega, from, to, 1e-10, 1e-11);
}

/// θ = |∫_{Re t_a}^{Re t_b} Ω dt| on the real axis.
inline double interference_theta(const Field& field, const Momentum& mom, const TurningPoint& a,
                                 const TurningPoint& b) {
  return std::abs(real_axis_phase(field, mom, a.t.real(), b.t.real()));
}

/// Newton from a uniform seed grid over the box (both branches), polished,
/// deduplicated and annotated with K and the pairwise θ table.
inline TurningPointSet find_turning_points(const Field& field, const Momentum& mom, const ComplexBox& box,
                                           const TurningOptions& opt = {}) {
  const auto& cfg = field.config();
  if (opt.seeds_per_period < 4.0) throw ConfigError("find_turning_points: need at least 4 seeds per carrier period");
  if (!(box.im_max > box.im_min) || !(box.re_max > box.re_min) || box.im_min < 0.0)
    throw ConfigError("find_turning_points: invalid search box");
  if (box.im_max > cfg.continuation_height)
    throw ConfigError("find_turning_points: box exceeds the potential continuation height");

  const double period = 2.0 * std::numbers::pi / cfg.omega;
  const auto cols = static_cast<std::size_t>(std::ceil((box.re_max - box.re_min) / period * opt.seeds_per_period)) + 1;
  const auto rows = static_cast<std::size_t>(std::max(1, opt.seed_rows));
  const std::size_t seeds = cols * rows * 2;

  struct Candidate {
    cplx t;
    int branch;
  };
  std::vector<std::optional<Candidate>> found(seeds);
  parallel_for(seeds, opt.workers, [&](std::size_t idx) {
    const int branch = idx % 2 ? -1 : 1;
    const std::size_t cell = idx / 2;
    const std::size_t c = cell % cols;
    const std::size_t r = cell / cols;
    const double re = box.re_min + (box.re_max - box.re_min) * static_cast<double>(c) / static_cast<double>(cols - 1);
    const double im = box.im_min + (box.im_max - box.im_min) * (static_cast<double>(r) + 0.5) / static_cast<double>(rows);
    const auto t = detail::newton<double>(field, mom, cplx(re, im), branch, box, opt.max_iterations);
    if (t && box.contains(*t)) found[idx] = Candidate{*t, branch};
  });

  std::vector<Candidate> all;
  for (auto& f : found)
    if (f) all.push_back(*f);
  // coarse roots that stalled early may still be 1e-4 apart, so dedup runs
  // again after polishing
  auto dedup = [&](auto& items, auto key, auto prefer) {
    std::sort(items.begin(), items.end(), [&](const auto& a, const auto& b) {
      const cplx ta = key(a), tb = key(b);
      if (ta.real() != tb.real()) return ta.real() < tb.real();
      return ta.imag() < tb.imag();
    });
    std::vector<std::decay_t<decltype(items.front())>> kept;
    for (const auto& item : items) {
      bool dup = false;
      for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
        if (key(item).real() - key(*it).real() > opt.dedup_radius) break;
        if (std::abs(key(item) - key(*it)) <= opt.dedup_radius) {
          if (prefer(item, *it)) *it = item;
          dup = true;
          break;
        }
      }
      if (!dup) kept.push_back(item);
    }
    items = std::move(kept);
  };
  dedup(all, [](const Candidate& c) { return c.t; }, [](const Candidate&, const Candidate&) { return false; });
  const auto& unique = all;

  std::vector<std::optional<TurningPoint>> polished(unique.size());
  parallel_for(unique.size(), opt.workers, [&](std::size_t i) {
    polished[i] = detail::polish_root(field, mom, unique[i].t, unique[i].branch, box, opt);
  });
  TurningPointSet set;
  set.search_box = box;
  for (auto& p : polished)
    if (p) set.points.push_back(*p);
  dedup(set.points, [](const TurningPoint& t) { return t.t; },
        [](const TurningPoint& a, const TurningPoint& b) { return a.omega2 < b.omega2; });

  for (auto& tp : set.points) tp.K = action_K(field, mom, tp, opt.action_panels);

  // θ from a cumulative real-axis phase (Ω > 0 there, so Θ is monotone)
  const std::size_t n = set.points.size();
  std::vector<double> phase(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    phase[i] = phase[i - 1] + real_axis_phase(field, mom, set.points[i - 1].t.real(), set.points[i].t.real());
  set.thetas.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) set.thetas[i][j] = std::abs(phase[j] - phase[i]);
  return set;
}

/// Phase-integral estimate of f(p, +inf); the sign (-1)^(p-p') uses the
/// Re-sorted index parity.
inline double semiclassical_f(const TurningPointSet& set) {
  if (set.points.empty()) throw ConfigError("semiclassical_f: empty turning-point set");
  const auto& pts = set.points;
  double f = 0.0;
  for (const auto& p : pts) f += std::exp(-2.0 * p.K);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double sign = ((j - i) % 2) ? -1.0 : 1.0;
      f += 2.0 * std::cos(2.0 * set.thetas[i][j]) * sign * std::exp(-pts[i].K - pts[j].K);
    }
  }
  return f;
}

/// Root with the smallest action (largest e^{-2K}).
inline const TurningPoint& dominant_point(const TurningPointSet& set) {
  if (set.points.empty()) throw ConfigError("dominant_point: empty turning-point set");
  return *std::min_element(set.points.begin(), set.points.end(), [](const auto& a, const auto& b) { return a.K < b.K; });
}

struct Omega2Grid {
  std::vector<double> re;
  std::vector<double> im;
  std::vector<double> value;  ///< row-major: value[j * re.size() + i] = |Ω²(re[i] + i im[j])|

  double at(std::size_t i, std::size_t j) const { return value[j * re.size() + i]; }
};

/// |Ω(p, t)|² on a uniform grid with nx × ny nodes spanning the box (edges included).
inline Omega2Grid omega2_grid(const Field& field, const Momentum& mom, const ComplexBox& box, std::size_t nx,
                              std::size_t ny, unsigned workers = 1) {
  if (nx < 2 || ny < 2) throw ConfigError("omega2_grid: need at least 2 nodes per axis");
  const double height = field.config().continuation_height;
  if (std::abs(box.im_max) > height || std::abs(box.im_min) > height)
    throw ConfigError("omega2_grid: box exceeds the potential continuation height");
  Omega2Grid g;
  g.re.resize(nx);
  g.im.resize(ny);
  for (std::size_t i = 0; i < nx; ++i) g.re[i] = box.re_min + (box.re_max - box.re_min) * double(i) / double(nx - 1);
  for (std::size_t j = 0; j < ny; ++j) g.im[j] = box.im_min + (box.im_max - box.im_min) * double(j) / double(ny - 1);
  g.value.resize(nx * ny);
  const double eps2 = mom.eps_perp() * mom.eps_perp();
  parallel_for(ny, workers, [&](std::size_t j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const cplx k = mom.p_par() - field.potential()(cplx(g.re[i], g.im[j]));
      g.value[j * nx + i] = std::abs(eps2 + k * k);
    }
  });
  return g;
}

}  // namespace fmpair
