#pragma once

// Fourier magnitude of the modulated pulse and the Jacobi-Anger prediction of
// its sidebands.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "fmpair/error.hpp"
#include "fmpair/field.hpp"
#include "fmpair/peaks.hpp"

namespace fmpair {

struct SpectralPeak {
  double freq = 0.0;
  double amp = 0.0;  ///< relative to the global maximum
};

struct FieldSpectrum {
  std::vector<double> freqs;
  std::vector<double> amplitude;  ///< normalized, max == 1 (all zero for E0 == 0)
  std::vector<SpectralPeak> peaks;  ///< strongest first
  double resolution = 0.0;          ///< actual bin spacing

  /// Frequency of the strongest detected peak.
  double dominant() const {
    if (peaks.empty()) throw NumericalError("field spectrum has no peaks");
    return peaks.front().freq;
  }
};

struct SpectrumOptions {
  double peak_floor = 1e-3;   ///< fraction of the global maximum
  double max_freq = 0.0;      ///< 0 selects 2 ω + b ω_m
};

namespace detail {
struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
}  // namespace detail

/// |FT E|(ω) from uniform samples over [-t_span, t_span], zero-padded so the
/// bin spacing is at most `resolution`. No window beyond the Gaussian envelope.
inline FieldSpectrum field_spectrum(const FieldConfig& cfg, double resolution, const SpectrumOptions& opt = {}) {
  cfg.validate();
  if (!(resolution > 0.0)) throw ConfigError("field_spectrum: resolution must be > 0");
  if (cfg.omega_m > 0.0 && resolution > cfg.omega_m / 10.0) {
    throw ConfigError("field_spectrum: resolution must be <= omega_m / 10 to resolve sidebands");
  }
  if (!(opt.peak_floor > 0.0 && opt.peak_floor < 1.0)) throw ConfigError("field_spectrum: peak floor must be in (0, 1)");

  const double top = opt.max_freq > 0.0 ? opt.max_freq : 2.0 * cfg.omega + cfg.b * cfg.omega_m;
  // Nyquist frequency at least twice the highest content of interest.
  const double dt = std::min(0.5, std::numbers::pi / (2.0 * std::max(top, cfg.max_frequency())));
  const double T = cfg.half_window();
  const auto samples = static_cast<std::size_t>(std::floor(2.0 * T / dt)) + 1;
  auto n = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / (dt * resolution)));
  n = std::max(n, samples);
  if (n % 2) ++n;

  std::unique_ptr<double, detail::FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, detail::FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  if (!in || !out) throw NumericalError("field_spectrum: allocation failed");
  std::fill(in.get(), in.get() + n, 0.0);
  for (std::size_t j = 0; j < samples; ++j) in.get()[j] = eval_field(cfg, -T + dt * static_cast<double>(j));

  std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> plan(
      fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  fftw_execute(plan.get());

  FieldSpectrum s;
  s.resolution = 2.0 * std::numbers::pi / (dt * static_cast<double>(n));
  const auto bins = std::min(n / 2 + 1, static_cast<std::size_t>(std::floor(top / s.resolution)) + 1);
  s.freqs.resize(bins);
  s.amplitude.resize(bins);
  double peak = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    s.freqs[k] = s.resolution * static_cast<double>(k);
    s.amplitude[k] = std::hypot(out.get()[k][0], out.get()[k][1]) * dt;
    peak = std::max(peak, s.amplitude[k]);
  }
  if (peak <= 0.0) return s;
  for (auto& a : s.amplitude) a /= peak;

  for (const auto& m : local_maxima(s.freqs, s.amplitude, opt.peak_floor)) s.peaks.push_back({m.x, m.y});
  std::stable_sort(s.peaks.begin(), s.peaks.end(), [](const auto& a, const auto& b) { return a.amp > b.amp; });
  return s;
}

struct Sideband {
  int k = 0;
  double freq = 0.0;
  double amp = 0.0;  ///< |J_k(b)| / max_k |J_k(b)|
};

/// Jacobi-Anger: cos(ωt + b sin ω_m t) = Σ_k J_k(b) cos((ω + k ω_m) t).
inline std::vector<Sideband> sideband_theory(const FieldConfig& cfg, int k_max) {
  if (k_max < 0) throw ConfigError("sideband_theory: k_max must be >= 0");
  std::vector<Sideband> out;
  double top = 0.0;
  for (int k = -k_max; k <= k_max; ++k) {
    const double j = std::abs(std::cyl_bessel_j(static_cast<double>(std::abs(k)), cfg.b));
    out.push_back({k, cfg.omega + k * cfg.omega_m, j});
    top = std::max(top, j);
  }
  for (auto& s : out) s.amp /= top;
  return out;
}

}  // namespace fmpair
