#pragma once

// INI-style run configuration. One section per module; every key is optional
// and unknown sections or keys are rejected.
//
//   [field]    E0 omega tau omega_m b t_span continuation_height allow_fast_modulation
//   [qve]      tol_rel tol_abs period_fraction plateau_fraction plateau_tolerance
//   [mode]     p_par p_perp record_stride
//   [field_spectrum]  resolution peak_floor max_freq samples k_max
//   [spectrum] p_min p_max step p_perp peak_floor field_resolution assign_tol n_min n_max
//   [density]  p_min p_max step p_perp extend_by max_extent
//   [density_scan]  omega_min omega_max omega_step
//   [turning]  p_par p_perp re_min re_max im_min im_max seeds_per_period seed_rows grid_nx grid_ny
//   [sweep]    omega_m_min omega_m_max omega_m_count b_min b_max b_count alpha_levels restrict_range

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "fmpair/error.hpp"
#include "fmpair/field.hpp"
#include "fmpair/qve.hpp"
#include "fmpair/semiclassical.hpp"
#include "fmpair/spectrum.hpp"
#include "fmpair/sweep.hpp"

namespace fmpair {

struct ModeSettings {
  double p_par = 0.08;
  double p_perp = 0.0;
  std::size_t record_stride = 1;  ///< keep every n-th accepted step in mode.csv
};

/// 0 selects min(1e-3, ω_m / 10), the coarsest bin that resolves sidebands.
inline double resolve_resolution(double requested, const FieldConfig& f) {
  if (requested > 0.0) return requested;
  return f.omega_m > 0.0 ? std::min(1e-3, f.omega_m / 10.0) : 1e-3;
}

struct FieldSpectrumSettings {
  double resolution = 0.0;  ///< see resolve_resolution
  SpectrumOptions options{};
  std::size_t samples = 4001;  ///< E(t), A(t) samples across the window
  int k_max = 4;
};

struct SpectrumSettings {
  GridSpec grid{};
  double p_perp = 0.0;
  double peak_floor = 1e-5;
  double field_resolution = 0.0;  ///< see resolve_resolution
  AssignOptions assign{};
};

struct DensityScanSettings {
  double omega_min = 0.48;
  double omega_max = 0.6;
  double omega_step = 0.002;
};

struct TurningSettings {
  double p_par = 0.08;
  double p_perp = 0.0;
  std::optional<ComplexBox> box;  ///< unset: ComplexBox::around(field)
  TurningOptions options{};
  // near-square cells on the default box; much coarser in Re lets the
  // discrete valley floor drift away from the roots
  std::size_t grid_nx = 3001;
  std::size_t grid_ny = 81;
};

struct SweepSettings {
  SweepAxes axes{};
  std::vector<double> alpha_levels;  ///< empty: per-ω default
};

struct RunConfig {
  FieldConfig field{};
  ode::Tolerance tol{};
  ModeOptions mode_options{};
  ModeSettings mode{};
  FieldSpectrumSettings field_spectrum{};
  SpectrumSettings spectrum{};
  DensityOptions density{};
  DensityScanSettings density_scan{};
  TurningSettings turning{};
  SweepSettings sweep{};
  /// Parsed key/value pairs as written, for the run manifest.
  std::map<std::string, std::map<std::string, std::string>> snapshot;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"field", {"E0", "omega", "tau", "omega_m", "b", "t_span", "continuation_height", "allow_fast_modulation"}},
      {"qve", {"tol_rel", "tol_abs", "period_fraction", "plateau_fraction", "plateau_tolerance"}},
      {"mode", {"p_par", "p_perp", "record_stride"}},
      {"field_spectrum", {"resolution", "peak_floor", "max_freq", "samples", "k_max"}},
      {"spectrum", {"p_min", "p_max", "step", "p_perp", "peak_floor", "field_resolution", "assign_tol", "n_min",
                    "n_max"}},
      {"density", {"p_min", "p_max", "step", "p_perp", "extend_by", "max_extent"}},
      {"density_scan", {"omega_min", "omega_max", "omega_step"}},
      {"turning", {"p_par", "p_perp", "re_min", "re_max", "im_min", "im_max", "seeds_per_period", "seed_rows",
                   "grid_nx", "grid_ny"}},
      {"sweep", {"omega_m_min", "omega_m_max", "omega_m_count", "b_min", "b_max", "b_count", "alpha_levels",
                 "restrict_range"}},
  };
  return keys;
}

class SectionReader {
 public:
  SectionReader(const std::string& name, const std::map<std::string, std::string>& kv) : name_(name), kv_(kv) {}

  template <class T>
  void get(const std::string& key, T& out) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return;
    out = parse<T>(key, it->second);
  }

  std::optional<double> maybe(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return parse<double>(key, it->second);
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse<double>(key, item));
    return out;
  }

 private:
  template <class T>
  T parse(const std::string& key, const std::string& raw) const {
    std::istringstream is(raw);
    T v{};
    if constexpr (std::is_same_v<T, bool>) {
      std::string s;
      is >> s;
      if (s == "true" || s == "1" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "no") return false;
      fail(key, raw);
    } else {
      if (!(is >> v)) fail(key, raw);
      std::string rest;
      if (is >> rest) fail(key, raw);
    }
    return v;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& raw) const {
    throw ConfigError("config: [" + name_ + "] " + key + " = '" + raw + "' is not a valid value");
  }

  std::string name_;
  const std::map<std::string, std::string>& kv_;
};

}  // namespace detail

/// Parses INI text. Throws ConfigError on syntax errors, unknown sections or
/// keys, malformed values and failed validation.
inline RunConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config " + origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  RunConfig cfg;
  const auto& known = detail::known_keys();
  for (const auto& [section, body] : tree) {
    auto sec = known.find(section);
    if (sec == known.end()) {
      if (body.empty()) throw ConfigError("config " + origin + ": key '" + section + "' outside any section");
      throw ConfigError("config " + origin + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!sec->second.count(key)) throw ConfigError("config " + origin + ": unknown key '" + key + "' in [" + section + "]");
      cfg.snapshot[section][key] = value.get_value<std::string>();
    }
  }
  auto reader = [&](const std::string& s) {
    static const std::map<std::string, std::string> empty;
    auto it = cfg.snapshot.find(s);
    return detail::SectionReader(s, it == cfg.snapshot.end() ? empty : it->second);
  };

  auto f = reader("field");
  f.get("E0", cfg.field.E0);
  f.get("omega", cfg.field.omega);
  f.get("tau", cfg.field.tau);
  f.get("omega_m", cfg.field.omega_m);
  f.get("b", cfg.field.b);
  f.get("t_span", cfg.field.t_span);
  f.get("continuation_height", cfg.field.continuation_height);
  f.get("allow_fast_modulation", cfg.field.allow_fast_modulation);

  auto q = reader("qve");
  q.get("tol_rel", cfg.tol.rel);
  q.get("tol_abs", cfg.tol.abs);
  q.get("period_fraction", cfg.mode_options.period_fraction);
  q.get("plateau_fraction", cfg.mode_options.plateau_fraction);
  q.get("plateau_tolerance", cfg.mode_options.plateau_tolerance);

  auto m = reader("mode");
  m.get("p_par", cfg.mode.p_par);
  m.get("p_perp", cfg.mode.p_perp);
  m.get("record_stride", cfg.mode.record_stride);

  auto fs = reader("field_spectrum");
  fs.get("resolution", cfg.field_spectrum.resolution);
  fs.get("peak_floor", cfg.field_spectrum.options.peak_floor);
  fs.get("max_freq", cfg.field_spectrum.options.max_freq);
  fs.get("samples", cfg.field_spectrum.samples);
  fs.get("k_max", cfg.field_spectrum.k_max);

  auto s = reader("spectrum");
  s.get("p_min", cfg.spectrum.grid.p_min);
  s.get("p_max", cfg.spectrum.grid.p_max);
  s.get("step", cfg.spectrum.grid.step);
  s.get("p_perp", cfg.spectrum.p_perp);
  s.get("peak_floor", cfg.spectrum.peak_floor);
  s.get("field_resolution", cfg.spectrum.field_resolution);
  s.get("assign_tol", cfg.spectrum.assign.tol);
  s.get("n_min", cfg.spectrum.assign.n_min);
  s.get("n_max", cfg.spectrum.assign.n_max);

  auto d = reader("density");
  cfg.density.grid = {-1.0, 1.0, 5e-3};
  d.get("p_min", cfg.density.grid.p_min);
  d.get("p_max", cfg.density.grid.p_max);
  d.get("step", cfg.density.grid.step);
  d.get("p_perp", cfg.density.p_perp);
  d.get("extend_by", cfg.density.extend_by);
  d.get("max_extent", cfg.density.max_extent);

  auto ds = reader("density_scan");
  ds.get("omega_min", cfg.density_scan.omega_min);
  ds.get("omega_max", cfg.density_scan.omega_max);
  ds.get("omega_step", cfg.density_scan.omega_step);

  auto t = reader("turning");
  t.get("p_par", cfg.turning.p_par);
  t.get("p_perp", cfg.turning.p_perp);
  {
    ComplexBox box = ComplexBox::around(cfg.field);
    bool any = false;
    for (auto [key, slot] : {std::pair{"re_min", &box.re_min}, std::pair{"re_max", &box.re_max},
                             std::pair{"im_min", &box.im_min}, std::pair{"im_max", &box.im_max}}) {
      if (auto v = t.maybe(key)) {
        *slot = *v;
        any = true;
      }
    }
    if (any) cfg.turning.box = box;
  }
  t.get("seeds_per_period", cfg.turning.options.seeds_per_period);
  t.get("seed_rows", cfg.turning.options.seed_rows);
  t.get("grid_nx", cfg.turning.grid_nx);
  t.get("grid_ny", cfg.turning.grid_ny);

  auto w = reader("sweep");
  w.get("omega_m_min", cfg.sweep.axes.omega_m.min);
  w.get("omega_m_max", cfg.sweep.axes.omega_m.max);
  w.get("omega_m_count", cfg.sweep.axes.omega_m.count);
  w.get("b_min", cfg.sweep.axes.b.min);
  w.get("b_max", cfg.sweep.axes.b.max);
  w.get("b_count", cfg.sweep.axes.b.count);
  w.get("restrict_range", cfg.sweep.axes.restrict_range);
  cfg.sweep.alpha_levels = w.list("alpha_levels");

  cfg.field.validate();
  validate(cfg.tol);
  cfg.spectrum.grid.validate();
  cfg.density.grid.validate();
  cfg.sweep.axes.validate();
  return cfg;
}

/// Reads a config file. A missing or unreadable file is an IoError naming the path.
inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  return parse_config(in, path.string());
}

}  // namespace fmpair
