#pragma once

// Momentum spectra f(p_par, +inf) over a grid, the number density, peak
// finding and multiphoton bookkeeping with the field-dressed pair energy.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fmpair/error.hpp"
#include "fmpair/field.hpp"
#include "fmpair/field_spectrum.hpp"
#include "fmpair/parallel.hpp"
#include "fmpair/peaks.hpp"
#include "fmpair/qve.hpp"

namespace fmpair {

/// Uniform p_par grid p_min, p_min + step, ..., p_max (p_max rounded to the grid).
struct GridSpec {
  double p_min = -0.2;
  double p_max = 1.0;
  double step = 2e-3;

  void validate() const {
    if (!(step > 0.0)) throw ConfigError("grid: step must be > 0");
    if (!std::isfinite(p_min) || !std::isfinite(p_max)) throw ConfigError("grid: range must be finite");
    if (!(p_max > p_min)) throw ConfigError("grid: p_max must exceed p_min");
  }
  std::size_t size() const { return static_cast<std::size_t>(std::llround((p_max - p_min) / step)) + 1; }
  double at(std::size_t i) const { return p_min + step * static_cast<double>(i); }
};

struct PhotonTerm {
  double freq = 0.0;
  int count = 0;
};

/// Multiphoton decomposition E ≈ Σ count_k freq_k of a pair energy.
struct Assignment {
  bool assigned = false;
  std::vector<PhotonTerm> terms;  ///< ascending frequency
  int photons = 0;
  double residual = std::numeric_limits<double>::infinity();  ///< |E - Σ| / E
  std::vector<std::vector<PhotonTerm>> ties;  ///< equally ranked alternatives
};

struct PeakInfo {
  double p_peak = 0.0;
  double f_peak = 0.0;
  double energy = 0.0;
  Assignment assignment;
};

struct MomentumSpectrum {
  std::vector<double> grid;
  std::vector<double> f_values;
  double p_perp = 0.0;
  std::vector<PeakInfo> peaks;
  double f_min_traj = 0.0;  ///< extremes of f over every integrated trajectory
  double f_max_traj = 0.0;
  std::vector<std::string> warnings;
};

struct ScanOptions {
  ode::Tolerance tol{};
  unsigned workers = 1;
  ModeOptions mode{};
};

namespace detail {

inline std::vector<ModeResult> integrate_points(const Field& field, const std::vector<double>& ps, double p_perp,
                                                const ScanOptions& opt) {
  std::vector<ModeResult> out(ps.size());
  parallel_for(ps.size(), opt.workers, [&](std::size_t i) {
    try {
      out[i] = integrate_mode(field, Momentum(ps[i], p_perp), opt.tol, opt.mode);
    } catch (const StepUnderflow& e) {
      std::ostringstream os;
      os << "p_par=" << ps[i] << ": " << e.what();
      throw StepUnderflow(os.str(), e.time());
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "p_par=" << ps[i] << ": " << e.what();
      throw NumericalError(os.str());
    }
  });
  return out;
}

inline void absorb(MomentumSpectrum& s, const std::vector<double>& ps, std::vector<ModeResult>& rs) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    s.f_min_traj = std::min(s.f_min_traj, rs[i].f_min);
    s.f_max_traj = std::max(s.f_max_traj, rs[i].f_max);
    for (auto& w : rs[i].warnings) s.warnings.push_back(std::move(w));
  }
}

}  // namespace detail

/// Integrates every grid point; results are stored in grid order.
inline MomentumSpectrum scan_spectrum(const Field& field, const GridSpec& grid, double p_perp,
                                      const ScanOptions& opt = {}) {
  grid.validate();
  validate(opt.tol);
  MomentumSpectrum s;
  s.p_perp = p_perp;
  s.grid.resize(grid.size());
  for (std::size_t i = 0; i < s.grid.size(); ++i) s.grid[i] = grid.at(i);
  auto rs = detail::integrate_points(field, s.grid, p_perp, opt);
  s.f_values.resize(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) s.f_values[i] = rs[i].f;
  detail::absorb(s, s.grid, rs);
  return s;
}

/// Relative edge height below which the grid is taken to capture the spectrum.
inline constexpr double kDensityEdgeFraction = 1e-4;

/// Composite Simpson rule on uniform samples (3/8 rule closes an odd interval count).
inline double simpson(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  std::size_t m = n - 1;  // intervals
  double tail = 0.0;
  if (m % 2 == 1) {
    if (m == 1) return 0.5 * h * (y[0] + y[1]);
    const std::size_t k = n - 4;
    tail = 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]);
    m -= 3;
  }
  double sum = y[0] + y[m];
  for (std::size_t i = 1; i < m; ++i) sum += (i % 2 ? 4.0 : 2.0) * y[i];
  return sum * h / 3.0 + tail;
}

/// n = 2 ∫ dp_par / (2π) f, per d²p_⊥/(2π)² at the scan's p_perp.
inline double number_density(const MomentumSpectrum& s) {
  if (s.grid.size() < 2) throw ConfigError("number_density: need at least two grid points");
  const double top = *std::max_element(s.f_values.begin(), s.f_values.end());
  if (top <= 0.0) return 0.0;
  const double lo = s.f_values.front();
  const double hi = s.f_values.back();
  if (!(lo < kDensityEdgeFraction * top && hi < kDensityEdgeFraction * top)) {
    std::ostringstream os;
    os << "number_density: grid does not capture the spectrum (f(" << s.grid.front() << ") = " << lo << ", f("
       << s.grid.back() << ") = " << hi << ", max f = " << top << ")";
    throw ConfigError(os.str());
  }
  const double h = s.grid[1] - s.grid[0];
  return simpson(s.f_values, h) / std::numbers::pi;
}

struct DensityOptions {
  GridSpec grid{};
  double p_perp = 0.0;
  ScanOptions scan{};
  double extend_by = 0.2;   ///< added to a failing edge per round
  double max_extent = 5.0;  ///< give up beyond |p_par| = max_extent
};

struct DensityResult {
  double n = 0.0;
  MomentumSpectrum spectrum;
};

/// Scans the initial grid and widens it until both edges fall below the
/// density edge criterion, then integrates.
inline DensityResult density(const Field& field, const DensityOptions& opt = {}) {
  opt.grid.validate();
  DensityResult r;
  r.spectrum = scan_spectrum(field, opt.grid, opt.p_perp, opt.scan);
  auto& s = r.spectrum;
  const double h = opt.grid.step;
  const auto grow = static_cast<std::size_t>(std::max(1.0, std::round(opt.extend_by / h)));
  for (;;) {
    const double top = *std::max_element(s.f_values.begin(), s.f_values.end());
    if (top <= 0.0) break;
    const bool left = !(s.f_values.front() < kDensityEdgeFraction * top);
    const bool right = !(s.f_values.back() < kDensityEdgeFraction * top);
    if (!left && !right) break;
    if (std::max(std::abs(s.grid.front()), std::abs(s.grid.back())) > opt.max_extent) break;  // number_density reports
    std::vector<double> ps;
    const double first = s.grid.front();
    const double last = s.grid.back();
    if (left) for (std::size_t k = grow; k >= 1; --k) ps.push_back(first - h * static_cast<double>(k));
    if (right) for (std::size_t k = 1; k <= grow; ++k) ps.push_back(last + h * static_cast<double>(k));
    auto rs = detail::integrate_points(field, ps, opt.p_perp, opt.scan);
    detail::absorb(s, ps, rs);
    std::vector<double> grid;
    std::vector<double> fv;
    std::size_t j = 0;
    if (left) {
      for (; j < grow; ++j) { grid.push_back(ps[j]); fv.push_back(rs[j].f); }
    }
    grid.insert(grid.end(), s.grid.begin(), s.grid.end());
    fv.insert(fv.end(), s.f_values.begin(), s.f_values.end());
    for (; j < ps.size(); ++j) { grid.push_back(ps[j]); fv.push_back(rs[j].f); }
    s.grid = std::move(grid);
    s.f_values = std::move(fv);
  }
  r.n = number_density(s);
  return r;
}

/// Local maxima above floor × max f, refined by a three-point parabola; ascending p.
inline std::vector<PeakInfo> find_peaks(const MomentumSpectrum& s, double floor) {
  if (!(floor > 0.0 && floor < 1.0)) throw ConfigError("find_peaks: floor must lie in (0, 1)");
  std::vector<PeakInfo> out;
  if (s.f_values.empty()) return out;
  const double top = *std::max_element(s.f_values.begin(), s.f_values.end());
  if (top <= 0.0) return out;
  for (const auto& m : local_maxima(s.grid, s.f_values, floor * top)) out.push_back({m.x, m.y, 0.0, {}});
  return out;
}

/// Field-dressed mass m* = sqrt(1 + E0² / (2 ω²)) with the carrier ω.
inline double effective_mass(const FieldConfig& cfg) {
  return std::sqrt(1.0 + cfg.E0 * cfg.E0 / (2.0 * cfg.omega * cfg.omega));
}

/// Total pair energy E(p) = 2 sqrt(m*² + p²).
inline double pair_energy(const FieldConfig& cfg, double p) {
  const double ms = effective_mass(cfg);
  return 2.0 * std::sqrt(ms * ms + p * p);
}

struct AssignOptions {
  int n_min = 3;
  int n_max = 6;
  double tol = 0.02;          ///< accepted relative residual
  double residual_tie = 1e-3; ///< residuals closer than this count as equal
};

namespace detail {

struct Candidate {
  std::vector<int> counts;
  int photons = 0;
  double residual = 0.0;
  int distinct = 0;
  int dominant = 0;
};

inline std::vector<PhotonTerm> to_terms(const std::vector<double>& freqs, const std::vector<int>& counts) {
  std::vector<PhotonTerm> t;
  for (std::size_t i = 0; i < freqs.size(); ++i)
    if (counts[i] > 0) t.push_back({freqs[i], counts[i]});
  return t;
}

}  // namespace detail

/// Best multiset of field-spectrum peak frequencies whose total matches the
/// pair energy within `tol`. Ranking, first key first:
///   1. fewest photons away from the dominant frequency
///   2. smaller residual (residuals within `residual_tie` count as equal)
///   3. fewer distinct frequencies
///   4. fewer photons in total
/// Candidates equal on every key are reported in `ties`.
inline Assignment assign_photons(double energy, const FieldSpectrum& spec, const AssignOptions& opt = {}) {
  if (spec.peaks.empty()) throw ConfigError("assign_photons: field spectrum has no peaks");
  if (opt.n_min < 1 || opt.n_max < opt.n_min) throw ConfigError("assign_photons: invalid photon-number range");
  if (!(energy > 0.0)) throw ConfigError("assign_photons: energy must be > 0");

  std::vector<double> freqs;
  for (const auto& p : spec.peaks) freqs.push_back(p.freq);
  std::sort(freqs.begin(), freqs.end());
  const double dom = spec.dominant();
  const auto dom_idx = static_cast<std::size_t>(
      std::min_element(freqs.begin(), freqs.end(), [&](double a, double b) { return std::abs(a - dom) < std::abs(b - dom); }) -
      freqs.begin());

  std::vector<detail::Candidate> found;
  std::vector<int> counts(freqs.size(), 0);
  const double ceiling = energy * (1.0 + opt.tol);
  // counts are chosen for freqs[i..] given a partial sum and photon number
  auto recurse = [&](auto&& self, std::size_t i, int photons, double sum) -> void {
    if (photons >= opt.n_min) {
      const double res = std::abs(energy - sum) / energy;
      if (res <= opt.tol) {
        detail::Candidate c;
        c.counts = counts;
        c.photons = photons;
        c.residual = res;
        for (int k : counts) c.distinct += k > 0;
        c.dominant = counts[dom_idx];
        found.push_back(std::move(c));
      }
    }
    if (photons == opt.n_max) return;
    for (std::size_t j = i; j < freqs.size(); ++j) {
      if (sum + freqs[j] > ceiling) break;
      ++counts[j];
      self(self, j, photons + 1, sum + freqs[j]);
      --counts[j];
    }
  };
  recurse(recurse, 0, 0, 0.0);

  Assignment a;
  if (found.empty()) return a;
  auto sideband = [](const detail::Candidate& c) { return c.photons - c.dominant; };
  int fewest = std::numeric_limits<int>::max();
  for (const auto& c : found) fewest = std::min(fewest, sideband(c));
  double best_res = std::numeric_limits<double>::infinity();
  for (const auto& c : found)
    if (sideband(c) == fewest) best_res = std::min(best_res, c.residual);
  std::vector<const detail::Candidate*> band;
  for (const auto& c : found)
    if (sideband(c) == fewest && c.residual <= best_res + opt.residual_tie) band.push_back(&c);
  auto rank = [](const detail::Candidate* c) { return std::make_pair(c->distinct, c->photons); };
  std::stable_sort(band.begin(), band.end(), [&](auto* x, auto* y) {
    if (rank(x) != rank(y)) return rank(x) < rank(y);
    return x->residual < y->residual;
  });
  const auto* best = band.front();
  a.assigned = true;
  a.terms = detail::to_terms(freqs, best->counts);
  a.photons = best->photons;
  a.residual = best->residual;
  for (std::size_t k = 1; k < band.size(); ++k)
    if (rank(band[k]) == rank(best)) a.ties.push_back(detail::to_terms(freqs, band[k]->counts));
  return a;
}

/// Fills energy and (when a field spectrum is given) the photon assignment of each peak.
inline void annotate_peaks(std::vector<PeakInfo>& peaks, const FieldConfig& cfg, const FieldSpectrum* field_spec,
                           const AssignOptions& opt = {}) {
  for (auto& p : peaks) {
    p.energy = pair_energy(cfg, p.p_peak);
    if (field_spec && !field_spec->peaks.empty()) p.assignment = assign_photons(p.energy, *field_spec, opt);
  }
}

struct DensityPoint {
  double omega = 0.0;
  double n = 0.0;
};

/// Unmodulated density as a function of the carrier frequency.
inline std::vector<DensityPoint> density_vs_frequency(const FieldConfig& base, double omega_min, double omega_max,
                                                      double omega_step, const DensityOptions& opt = {}) {
  if (base.b != 0.0) throw ConfigError("density_vs_frequency: requires an unmodulated field (b = 0)");
  if (!(omega_step > 0.0) || !(omega_max >= omega_min) || !(omega_min > 0.0))
    throw ConfigError("density_vs_frequency: invalid frequency range");
  const auto count = static_cast<std::size_t>(std::llround((omega_max - omega_min) / omega_step)) + 1;
  std::vector<DensityPoint> out;
  for (std::size_t i = 0; i < count; ++i) {
    FieldConfig cfg = base;
    cfg.omega = omega_min + omega_step * static_cast<double>(i);
    cfg.omega_m = 0.0;
    out.push_back({cfg.omega, density(Field(cfg), opt).n});
  }
  return out;
}

}  // namespace fmpair
