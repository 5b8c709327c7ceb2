#pragma once

// Frequency-modulated Gaussian pulse E(t) = E0 exp(-t^2 / 2 tau^2) cos(omega t + b sin(omega_m t)),
// its vector potential A (E = -dA/dt) and spectral bookkeeping.
//
// Units: hbar = c = m = 1. Field strengths are multiples of the critical
// field, so eE in the kinetic equations equals the stored dimensionless value.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <sstream>
#include <vector>

#include "fmpair/error.hpp"
#include "fmpair/quadrature.hpp"

namespace fmpair {

/// Field parameters plus the numerical time window.
struct FieldConfig {
  double E0 = 0.1;      ///< peak field, units of E_cr
  double omega = 0.5;   ///< carrier frequency, units of m
  double tau = 100.0;   ///< pulse duration, units of 1/m
  double omega_m = 0.0; ///< modulation frequency, units of m
  double b = 0.0;       ///< modulation depth
  double t_span = 0.0;  ///< half-width of the real-time window; 0 selects 8 tau
  double continuation_height = 10.0;  ///< max |Im t| for the complex potential
  bool allow_fast_modulation = false; ///< accept omega_m >= omega

  static constexpr double kEdgeEnvelopeBound = 1e-13;

  double half_window() const { return t_span > 0.0 ? t_span : 8.0 * tau; }

  /// Upper bound on the instantaneous frequency content of the pulse.
  double max_frequency() const { return omega + b * omega_m + 3.0 / tau; }

  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("field: " + msg); };
    if (!(E0 >= 0.0)) fail("E0 must be >= 0");
    if (!(omega > 0.0)) fail("omega must be > 0");
    if (!(tau > 0.0)) fail("tau must be > 0");
    if (!(omega_m >= 0.0)) fail("omega_m must be >= 0");
    if (!(b >= 0.0)) fail("b must be >= 0");
    if (!(t_span >= 0.0)) fail("t_span must be >= 0");
    if (!(continuation_height > 0.0)) fail("continuation_height must be > 0");
    if (omega_m >= omega && !allow_fast_modulation) {
      fail("omega_m must be below omega (set allow_fast_modulation to override)");
    }
    const double T = half_window();
    const double edge = std::exp(-T * T / (2.0 * tau * tau));
    if (!(edge < kEdgeEnvelopeBound)) {
      std::ostringstream os;
      os << "envelope at window edge is " << edge << " (t_span = " << T
         << "); must be below " << kEdgeEnvelopeBound;
      fail(os.str());
    }
  }
};

/// E(t) for real or complex t (the expression is entire).
template <class T>
T eval_field(const FieldConfig& cfg, T t) {
  using std::cos;
  using std::exp;
  using std::sin;
  using R = quad::real_of_t<T>;
  const R tau = static_cast<R>(cfg.tau);
  const T phase = static_cast<R>(cfg.omega) * t + static_cast<R>(cfg.b) * sin(static_cast<R>(cfg.omega_m) * t);
  return static_cast<R>(cfg.E0) * exp(-t * t / (R(2) * tau * tau)) * cos(phase);
}

/// ω_eff(t) = ω + b sin(ω_m t) / t, with the t → 0 limit ω + b ω_m.
inline double effective_frequency(const FieldConfig& cfg, double t) {
  const double x = cfg.omega_m * t;
  double sinc = 1.0;
  if (std::abs(x) < 1e-4) {
    sinc = 1.0 - x * x / 6.0;
  } else {
    sinc = std::sin(x) / x;
  }
  return cfg.omega + cfg.b * cfg.omega_m * sinc;
}

/// Keldysh parameter γ = m ω / (|e| E0).
inline double adiabaticity(const FieldConfig& cfg) {
  if (!(cfg.E0 > 0.0)) throw ConfigError("adiabaticity: undefined for E0 = 0");
  return cfg.omega / cfg.E0;
}

/// Constraint level α on the modulation: a config satisfies it iff b ω_m <= α ω.
struct ModulationConstraint {
  double alpha = 1.0;

  bool satisfied_by(double omega_m, double b, double omega) const { return b * omega_m <= alpha * omega; }
  bool satisfied_by(const FieldConfig& cfg) const { return satisfied_by(cfg.omega_m, cfg.b, cfg.omega); }
  /// Boundary curve b = α ω / ω_m (infinite at ω_m = 0).
  double b_limit(double omega_m, double omega) const {
    return omega_m > 0.0 ? alpha * omega / omega_m : std::numeric_limits<double>::infinity();
  }
};

/// Vector potential cached on a uniform real-time grid with cubic Hermite
/// interpolation (node derivatives are the exact -E). Anchored at A(-t_span) = 0.
/// Immutable after construction.
class VectorPotential {
 public:
  static constexpr double kQuadratureTolerance = 1e-12;
  static constexpr double kInterpolationTolerance = 1e-10;

  explicit VectorPotential(const FieldConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    t0_ = -cfg_.half_window();
    // Hermite error <= h^4/384 max|A''''|, with |A''''| = |E'''| ~ E0 ω_max^3.
    const double w = cfg_.max_frequency();
    const double m4 = 1.5 * cfg_.E0 * w * w * w;
    double h = 0.05;
    if (m4 > 0.0) h = std::min(h, 0.8 * std::pow(384.0 * kInterpolationTolerance / m4, 0.25));
    const auto cells = static_cast<std::size_t>(std::ceil(2.0 * cfg_.half_window() / h));
    h_ = 2.0 * cfg_.half_window() / static_cast<double>(cells);

    value_.resize(cells + 1);
    slope_.resize(cells + 1);
    value_[0] = 0.0;
    auto e = [this](double t) { return eval_field(cfg_, t); };
    for (std::size_t k = 0; k <= cells; ++k) {
      const double t = node(k);
      slope_[k] = -e(t);
      if (k == cells) break;
      double err = 0.0;
      double piece = quad::panel(e, t, node(k + 1), err);
      if (err > kQuadratureTolerance) piece = quad::integrate<double>(e, t, node(k + 1), kQuadratureTolerance, 1e-15);
      value_[k + 1] = value_[k] - piece;
    }
  }

  const FieldConfig& config() const { return cfg_; }
  double step() const { return h_; }
  std::size_t nodes() const { return value_.size(); }
  double left() const { return t0_; }
  double right() const { return -t0_; }

  /// A(t) on the real axis. Outside the window the field is treated as zero.
  template <class R = double>
  R operator()(R t) const {
    if (t <= R(t0_)) return R(0);
    const std::size_t last = value_.size() - 1;
    if (t >= R(-t0_)) return R(value_[last]);
    const R x = (t - R(t0_)) / R(h_);
    auto k = static_cast<std::size_t>(x);
    if (k >= last) k = last - 1;
    const R s = x - R(k);
    const R s2 = s * s;
    const R s3 = s2 * s;
    const R h00 = R(2) * s3 - R(3) * s2 + R(1);
    const R h10 = s3 - R(2) * s2 + s;
    const R h01 = R(-2) * s3 + R(3) * s2;
    const R h11 = s3 - s2;
    const R h = R(h_);
    return h00 * R(value_[k]) + h10 * h * R(slope_[k]) + h01 * R(value_[k + 1]) + h11 * h * R(slope_[k + 1]);
  }

  /// Analytic continuation: real-axis value at Re t, then a vertical leg
  /// A(x + iy) = A(x) - i ∫_0^y E(x + i s) ds.
  template <class R>
  std::complex<R> operator()(std::complex<R> t) const {
    check_height(static_cast<double>(t.imag()));
    const R x = t.real();
    const R y = t.imag();
    std::complex<R> a((*this)(x), R(0));
    if (y == R(0)) return a;
    const std::complex<R> I(0, 1);
    auto vert = [&](R s) { return eval_field(cfg_, std::complex<R>(x, s)); };
    // Fixed composite Gauss-Legendre: the integrand is entire and varies on
    // the scale 1/max_frequency, so 20 nodes per 2.5/max_frequency suffice to
    // rounding (also in long double, used for polishing roots).
    const double span = std::abs(static_cast<double>(y)) * std::max(cfg_.max_frequency(), 1.0);
    const int panels = std::max(1, static_cast<int>(std::ceil(span / 2.5)));
    using Rule = boost::math::quadrature::gauss<R, 20>;
    std::complex<R> leg(0, 0);
    const R width = y / R(panels);
    for (int k = 0; k < panels; ++k) leg += Rule::integrate(vert, width * R(k), width * R(k + 1));
    return a - I * leg;
  }

  /// Same quantity along a straight segment from the real node x0 to t.
  /// Independent contour used to check path independence.
  std::complex<double> along_segment(double x0, std::complex<double> t) const {
    check_height(t.imag());
    const std::complex<double> d = t - x0;
    auto seg = [&](double s) { return eval_field(cfg_, std::complex<double>(x0) + s * d); };
    const std::complex<double> leg = quad::integrate<double>(seg, 0.0, 1.0, kQuadratureTolerance / 10, 1e-15);
    return (*this)(x0) - d * leg;
  }

 private:
  double node(std::size_t k) const { return t0_ + h_ * static_cast<double>(k); }

  void check_height(double y) const {
    if (std::abs(y) > cfg_.continuation_height) {
      std::ostringstream os;
      os << "vector potential: |Im t| = " << std::abs(y) << " exceeds continuation height "
         << cfg_.continuation_height;
      throw ConfigError(os.str());
    }
  }

  FieldConfig cfg_;
  double t0_ = 0.0;
  double h_ = 0.0;
  std::vector<double> value_;
  std::vector<double> slope_;
};

/// A field configuration bundled with its (shared, immutable) potential cache.
class Field {
 public:
  explicit Field(const FieldConfig& cfg) : potential_(std::make_shared<const VectorPotential>(cfg)) {}

  const FieldConfig& config() const { return potential_->config(); }
  const VectorPotential& potential() const { return *potential_; }

  template <class T> T E(T t) const { return eval_field(config(), t); }
  template <class T> T A(T t) const { return (*potential_)(t); }

 private:
  std::shared_ptr<const VectorPotential> potential_;
};

}  // namespace fmpair
