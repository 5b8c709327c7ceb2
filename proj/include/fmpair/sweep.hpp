#pragma once

// Number density over the (ω_m, b) modulation plane, partitioned into bands of
// the constraint b ω_m <= α ω.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fmpair/error.hpp"
#include "fmpair/field.hpp"
#include "fmpair/parallel.hpp"
#include "fmpair/spectrum.hpp"

namespace fmpair {

/// Uniform samples min, ..., max (count >= 1; count == 1 gives {min}).
struct Axis {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;

  double at(std::size_t i) const {
    if (count == 1) return min;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  std::vector<double> values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = at(i);
    return v;
  }
};

struct SweepAxes {
  Axis omega_m{0.0, 0.1, 50};
  Axis b{0.0, 10.0, 50};
  bool restrict_range = true;  ///< require ω_m in [0, 0.1] and b in [0, 10]

  void validate() const {
    for (const auto* a : {&omega_m, &b}) {
      if (a->count == 0) throw ConfigError("sweep: axis count must be >= 1");
      if (!(a->min >= 0.0) || !(a->max >= a->min)) throw ConfigError("sweep: axis bounds must satisfy 0 <= min <= max");
    }
    if (restrict_range && (omega_m.max > 0.1 || b.max > 10.0))
      throw ConfigError("sweep: axes exceed omega_m <= 0.1, b <= 10 (disable restrict_range to override)");
  }
};

/// Default α levels: {0.1, 0.32, 1} at ω = 0.5, otherwise {0.1, 0.5, 1}.
inline std::vector<double> default_alpha_levels(double omega) {
  if (std::abs(omega - 0.5) < 1e-12) return {0.1, 0.32, 1.0};
  return {0.1, 0.5, 1.0};
}

struct CellFailure {
  std::size_t i = 0;  ///< ω_m index
  std::size_t j = 0;  ///< b index
  std::string message;
};

struct SweepGrid {
  double omega = 0.0;
  std::vector<double> omega_m_axis;
  std::vector<double> b_axis;
  std::vector<double> density;  ///< density[i * b_axis.size() + j]; NaN marks a failed cell
  std::vector<double> alpha_levels;
  std::vector<CellFailure> failures;

  double at(std::size_t i, std::size_t j) const { return density[i * b_axis.size() + j]; }
  bool valid(std::size_t i, std::size_t j) const { return !std::isnan(at(i, j)); }
};

struct SweepOptions {
  DensityOptions density{};
  unsigned workers = 1;
  std::vector<double> alpha_levels;  ///< empty selects default_alpha_levels(ω)
  std::string checkpoint;            ///< CSV appended per completed cell; empty disables
  bool resume = false;               ///< reuse cells already in the checkpoint
};

namespace detail {

inline std::string format_cell(double omega_m, double b, double n) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", omega_m, b, n);
  return buf;
}

/// Cells from a checkpoint keyed by exact (ω_m, b); 17 digits round-trip.
inline std::map<std::pair<double, double>, double> read_checkpoint(const std::string& path) {
  std::map<std::pair<double, double>, double> out;
  std::ifstream in(path);
  if (!in) return out;  // nothing to resume
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.rfind("omega_m", 0) == 0) continue;
    double wm = 0.0, b = 0.0, n = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &wm, &b, &n) != 3) {
      std::ostringstream os;
      os << "checkpoint " << path << ": malformed line " << lineno;
      throw IoError(os.str());
    }
    out[{wm, b}] = n;
  }
  return out;
}

}  // namespace detail

/// Density on every (ω_m, b) cell. A failing cell becomes NaN plus an entry in
/// `failures`; the sweep continues. Cells are assembled by index, so output is
/// identical for any worker count.
inline SweepGrid run_sweep(const FieldConfig& base, const SweepAxes& axes, const SweepOptions& opt = {}) {
  axes.validate();
  base.validate();
  SweepGrid g;
  g.omega = base.omega;
  g.omega_m_axis = axes.omega_m.values();
  g.b_axis = axes.b.values();
  g.alpha_levels = opt.alpha_levels.empty() ? default_alpha_levels(base.omega) : opt.alpha_levels;
  const std::size_t nb = g.b_axis.size();
  const std::size_t cells = g.omega_m_axis.size() * nb;
  g.density.assign(cells, std::numeric_limits<double>::quiet_NaN());

  std::map<std::pair<double, double>, double> done;
  if (opt.resume && !opt.checkpoint.empty()) done = detail::read_checkpoint(opt.checkpoint);

  std::ofstream ckpt;
  std::mutex ckpt_mu;
  if (!opt.checkpoint.empty()) {
    const bool fresh = !opt.resume || done.empty();
    ckpt.open(opt.checkpoint, fresh ? std::ios::trunc : std::ios::app);
    if (!ckpt) throw IoError("cannot open checkpoint file " + opt.checkpoint);
    if (fresh) ckpt << "omega_m,b,n\n" << std::flush;
  }

  std::vector<std::optional<std::string>> errors(cells);
  DensityOptions dopt = opt.density;
  dopt.scan.workers = 1;  // parallelism is across cells
  parallel_for(cells, opt.workers, [&](std::size_t idx) {
    const double wm = g.omega_m_axis[idx / nb];
    const double b = g.b_axis[idx % nb];
    if (auto it = done.find({wm, b}); it != done.end()) {
      g.density[idx] = it->second;
      return;
    }
    try {
      FieldConfig cfg = base;
      cfg.omega_m = wm;
      cfg.b = b;
      const double n = density(Field(cfg), dopt).n;
      g.density[idx] = n;
      if (ckpt.is_open()) {
        std::lock_guard lock(ckpt_mu);
        ckpt << detail::format_cell(wm, b, n) << std::flush;
      }
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  });
  for (std::size_t idx = 0; idx < cells; ++idx)
    if (errors[idx]) g.failures.push_back({idx / nb, idx % nb, *errors[idx]});
  return g;
}

inline constexpr int kUnphysicalBand = -1;

/// Band k with α_k ω < b ω_m <= α_{k+1} ω (α_0 = 0; b ω_m = 0 is band 0), or
/// kUnphysicalBand above the largest level.
inline int classify_region(double omega_m, double b, double omega, const std::vector<double>& levels) {
  if (levels.empty()) throw ConfigError("classify_region: no alpha levels");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > (k ? levels[k - 1] : 0.0))) throw ConfigError("classify_region: alpha levels must increase");
  }
  const double x = b * omega_m;
  for (std::size_t k = 0; k < levels.size(); ++k)
    if (x <= levels[k] * omega) return static_cast<int>(k);
  return kUnphysicalBand;
}

struct SweepPoint {
  double omega_m = 0.0;
  double b = 0.0;
  double n = 0.0;
};

struct RegionExtrema {
  int region = 0;
  double alpha_low = 0.0;
  double alpha_high = 0.0;
  SweepPoint min_point;
  SweepPoint max_point;
  std::size_t cells = 0;    ///< valid cells in the band
  std::size_t missing = 0;  ///< failed cells in the band, excluded
};

/// Arg-min and arg-max of the density over the valid cells of one band.
inline RegionExtrema find_extrema(const SweepGrid& g, int region) {
  if (region < 0 || region >= static_cast<int>(g.alpha_levels.size()))
    throw ConfigError("find_extrema: region index out of range");
  RegionExtrema r;
  r.region = region;
  r.alpha_low = region ? g.alpha_levels[region - 1] : 0.0;
  r.alpha_high = g.alpha_levels[region];
  r.min_point.n = std::numeric_limits<double>::infinity();
  r.max_point.n = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.omega_m_axis.size(); ++i) {
    for (std::size_t j = 0; j < g.b_axis.size(); ++j) {
      const double wm = g.omega_m_axis[i];
      const double b = g.b_axis[j];
      if (classify_region(wm, b, g.omega, g.alpha_levels) != region) continue;
      if (!g.valid(i, j)) {
        ++r.missing;
        continue;
      }
      ++r.cells;
      const double n = g.at(i, j);
      if (n < r.min_point.n) r.min_point = {wm, b, n};
      if (n > r.max_point.n) r.max_point = {wm, b, n};
    }
  }
  if (r.cells == 0) {
    std::ostringstream os;
    os << "find_extrema: region " << region << " (alpha in (" << r.alpha_low << ", " << r.alpha_high
       << "]) has no valid cells";
    throw NumericalError(os.str());
  }
  return r;
}

}  // namespace fmpair
