// fmpair: command-line driver. Every subcommand writes its data files plus
// manifest.json into --out; data files name the manifest they belong to.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "fmpair/config.hpp"
#include "fmpair/error.hpp"
#include "fmpair/field.hpp"
#include "fmpair/field_spectrum.hpp"
#include "fmpair/parallel.hpp"
#include "fmpair/qve.hpp"
#include "fmpair/semiclassical.hpp"
#include "fmpair/spectrum.hpp"
#include "fmpair/sweep.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fmpair;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kManifest = "manifest.json";

// 9 significant digits everywhere
std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
double r9(double v) { return std::isfinite(v) ? std::stod(g9(v)) : v; }
json num(double v) { return std::isfinite(v) ? json(r9(v)) : json(nullptr); }

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  const fs::path& dir() const { return dir_; }

  /// CSV with a leading comment naming the manifest.
  void csv(const std::string& name, const std::string& header, const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open(name);
    out << "# manifest: " << kManifest << "\n" << header << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << g9(r[i]);
      out << "\n";
    }
    close(out, name);
  }

  void json_file(const std::string& name, json body) {
    json doc;
    doc["manifest"] = kManifest;
    doc["data"] = std::move(body);
    std::ofstream out = open(name);
    out << doc.dump(2) << "\n";
    close(out, name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name);
    if (!out) throw IoError("cannot write " + (dir_ / name).string());
    return out;
  }
  void close(std::ofstream& out, const std::string& name) {
    out.close();
    if (!out) throw IoError("write failed for " + (dir_ / name).string());
    files_.push_back(name);
  }

  fs::path dir_;
  std::vector<std::string> files_;
};

json grid_json(const GridSpec& g) { return {{"p_min", num(g.p_min)}, {"p_max", num(g.p_max)}, {"step", num(g.step)}}; }

json assignment_json(const Assignment& a) {
  json terms = json::array();
  for (const auto& t : a.terms) terms.push_back({{"freq", num(t.freq)}, {"count", t.count}});
  return {{"assigned", a.assigned}, {"photons", a.photons}, {"residual", num(a.residual)}, {"terms", terms}};
}

json warnings_json(const std::vector<std::string>& w) { return json(w); }

struct Context {
  RunConfig cfg;
  unsigned workers = 1;
  bool resume = false;
  json grids = json::object();
};

// ---- subcommands

void cmd_field(Context& ctx, Output& out) {
  const auto& c = ctx.cfg;
  Field field(c.field);
  const double T = c.field.half_window();
  const std::size_t n = std::max<std::size_t>(2, c.field_spectrum.samples);
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -T + 2.0 * T * static_cast<double>(i) / static_cast<double>(n - 1);
    rows.push_back({t, field.E(t), field.A(t)});
  }
  out.csv("field.csv", "t,E,A", rows);

  const auto spec = field_spectrum(c.field, resolve_resolution(c.field_spectrum.resolution, c.field), c.field_spectrum.options);
  rows.clear();
  for (std::size_t i = 0; i < spec.freqs.size(); ++i) rows.push_back({spec.freqs[i], spec.amplitude[i]});
  out.csv("field_spectrum.csv", "freq,amplitude", rows);

  json peaks = json::array();
  for (const auto& p : spec.peaks) peaks.push_back({{"freq", num(p.freq)}, {"amp", num(p.amp)}});
  out.json_file("field_peaks.json", peaks);

  json sb = json::array();
  for (const auto& s : sideband_theory(c.field, c.field_spectrum.k_max))
    sb.push_back({{"k", s.k}, {"freq", num(s.freq)}, {"amp", num(s.amp)}});
  json info = {{"resolution", num(spec.resolution)},
               {"effective_frequency_t0", num(effective_frequency(c.field, 0.0))},
               {"sidebands", sb}};
  if (c.field.E0 > 0.0) info["gamma"] = num(adiabaticity(c.field));
  out.json_file("field_info.json", info);
  ctx.grids["field_spectrum"] = {{"resolution", num(spec.resolution)}, {"samples", n}};
  if (!spec.peaks.empty()) std::cout << "dominant frequency " << g9(spec.dominant()) << "\n";
}

void cmd_mode(Context& ctx, Output& out) {
  const auto& c = ctx.cfg;
  if (c.mode.record_stride == 0) throw ConfigError("mode: record_stride must be >= 1");
  Field field(c.field);
  ModeOptions mo = c.mode_options;
  mo.record_trajectory = true;
  const auto r = integrate_mode(field, Momentum(c.mode.p_par, c.mode.p_perp), c.tol, mo);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
    if (i % c.mode.record_stride && i + 1 != r.trajectory.size()) continue;
    const auto& s = r.trajectory[i];
    rows.push_back({s.t, s.f, s.u, s.v});
  }
  out.csv("mode.csv", "t,f,u,v", rows);
  out.json_file("mode.json", {{"p_par", num(c.mode.p_par)},
                              {"p_perp", num(c.mode.p_perp)},
                              {"f", num(r.f)},
                              {"f_min", num(r.f_min)},
                              {"f_max", num(r.f_max)},
                              {"plateau_ok", r.plateau_ok},
                              {"plateau_variation", num(r.plateau_variation)},
                              {"steps_accepted", r.stats.accepted},
                              {"steps_rejected", r.stats.rejected},
                              {"rhs_evaluations", r.stats.evaluations},
                              {"warnings", warnings_json(r.warnings)}});
  std::cout << "f(p_par=" << g9(c.mode.p_par) << ") = " << g9(r.f) << "\n";
}

void cmd_spectrum(Context& ctx, Output& out) {
  const auto& c = ctx.cfg;
  Field field(c.field);
  ScanOptions so{c.tol, ctx.workers, c.mode_options};
  auto s = scan_spectrum(field, c.spectrum.grid, c.spectrum.p_perp, so);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.grid.size(); ++i) rows.push_back({s.grid[i], s.f_values[i]});
  out.csv("spectrum.csv", "p_par,f", rows);

  auto peaks = find_peaks(s, c.spectrum.peak_floor);
  const auto fspec = field_spectrum(c.field, resolve_resolution(c.spectrum.field_resolution, c.field));
  annotate_peaks(peaks, c.field, &fspec, c.spectrum.assign);
  json list = json::array();
  for (const auto& p : peaks)
    list.push_back({{"p", num(p.p_peak)}, {"f", num(p.f_peak)}, {"energy", num(p.energy)},
                    {"assignment", assignment_json(p.assignment)}});
  out.json_file("peaks.json", {{"dominant_frequency", num(fspec.dominant())},
                               {"effective_mass", num(effective_mass(c.field))},
                               {"f_min_trajectory", num(s.f_min_traj)},
                               {"f_max_trajectory", num(s.f_max_traj)},
                               {"peaks", list},
                               {"warnings", warnings_json(s.warnings)}});
  ctx.grids["spectrum"] = grid_json(c.spectrum.grid);
  for (const auto& p : peaks) std::cout << "peak p=" << g9(p.p_peak) << " f=" << g9(p.f_peak) << "\n";
}

void cmd_density(Context& ctx, Output& out) {
  const auto& c = ctx.cfg;
  DensityOptions d = c.density;
  d.scan = {c.tol, ctx.workers, c.mode_options};
  const auto r = density(Field(c.field), d);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.spectrum.grid.size(); ++i) rows.push_back({r.spectrum.grid[i], r.spectrum.f_values[i]});
  out.csv("density_spectrum.csv", "p_par,f", rows);
  out.json_file("density.json", {{"n", num(r.n)},
                                 {"p_perp", num(d.p_perp)},
                                 {"p_min_used", num(r.spectrum.grid.front())},
                                 {"p_max_used", num(r.spectrum.grid.back())},
                                 {"modes", r.spectrum.grid.size()},
                                 {"warnings", warnings_json(r.spectrum.warnings)}});
  ctx.grids["density"] = grid_json(c.density.grid);
  std::cout << "n = " << g9(r.n) << "\n";
}

void cmd_density_scan(Context& ctx, Output& out) {
  const auto& c = ctx.cfg;
  DensityOptions d = c.density;
  d.scan = {c.tol, ctx.workers, c.mode_options};
  const auto pts = density_vs_frequency(c.field, c.density_scan.omega_min, c.density_scan.omega_max,
                                        c.density_scan.omega_step, d);
  std::vector<std::vector<double>> rows;
  for (const auto& p : pts) rows.push_back({p.omega, p.n});
  out.csv("density_scan.csv", "omega,n", rows);
  ctx.grids["density"] = grid_json(c.density.grid);
  ctx.grids["density_scan"] = {{"omega_min", num(c.density_scan.omega_min)},
                               {"omega_max", num(c.density_scan.omega_max)},
                               {"omega_step", num(c.density_scan.omega_step)}};
}

void cmd_turning(Context& ctx, Output& out) {
  const auto& c = ctx.cfg;
  Field field(c.field);
  const Momentum mom(c.turning.p_par, c.turning.p_perp);
  const ComplexBox box = c.turning.box.value_or(ComplexBox::around(c.field));
  TurningOptions to = c.turning.options;
  to.workers = ctx.workers;
  const auto set = find_turning_points(field, mom, box, to);

  json pts = json::array();
  for (const auto& p : set.points)
    pts.push_back({{"re", num(p.t.real())}, {"im", num(p.t.imag())}, {"branch", p.branch},
                   {"residual", num(p.residual)}, {"omega2", num(p.omega2)}, {"K", num(p.K)}});
  json body = {{"p_par", num(c.turning.p_par)},
               {"p_perp", num(c.turning.p_perp)},
               {"box", {{"re_min", num(box.re_min)}, {"re_max", num(box.re_max)},
                        {"im_min", num(box.im_min)}, {"im_max", num(box.im_max)}}},
               {"points", pts}};
  if (!set.points.empty()) {
    const auto& d = dominant_point(set);
    body["dominant"] = {{"re", num(d.t.real())}, {"im", num(d.t.imag())}, {"K", num(d.K)},
                        {"exp_minus_2K", num(std::exp(-2.0 * d.K))}};
    body["semiclassical_f"] = num(semiclassical_f(set));
  }
  out.json_file("turning_points.json", body);

  const auto g = omega2_grid(field, mom, box, c.turning.grid_nx, c.turning.grid_ny, ctx.workers);
  std::vector<std::vector<double>> rows;
  rows.reserve(g.value.size());
  for (std::size_t j = 0; j < g.im.size(); ++j)
    for (std::size_t i = 0; i < g.re.size(); ++i) rows.push_back({g.re[i], g.im[j], g.at(i, j)});
  out.csv("omega2_grid.csv", "re,im,omega2_abs", rows);
  ctx.grids["omega2_grid"] = {{"nx", c.turning.grid_nx}, {"ny", c.turning.grid_ny}};
  std::cout << set.points.size() << " turning points\n";
}

void cmd_sweep(Context& ctx, Output& out) {
  const auto& c = ctx.cfg;
  SweepOptions so;
  so.density = c.density;
  so.density.scan = {c.tol, 1, c.mode_options};
  so.workers = ctx.workers;
  so.alpha_levels = c.sweep.alpha_levels;
  so.checkpoint = (out.dir() / "sweep.checkpoint.csv").string();
  so.resume = ctx.resume;
  const auto g = run_sweep(c.field, c.sweep.axes, so);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < g.omega_m_axis.size(); ++i)
    for (std::size_t j = 0; j < g.b_axis.size(); ++j) rows.push_back({g.omega_m_axis[i], g.b_axis[j], g.at(i, j)});
  out.csv("sweep.csv", "omega_m,b,n", rows);

  json regions = json::array();
  for (std::size_t k = 0; k < g.alpha_levels.size(); ++k) {
    try {
      const auto e = find_extrema(g, static_cast<int>(k));
      auto pt = [](const SweepPoint& p) { return json{{"omega_m", num(p.omega_m)}, {"b", num(p.b)}, {"n", num(p.n)}}; };
      regions.push_back({{"region", e.region}, {"alpha", {num(e.alpha_low), num(e.alpha_high)}},
                         {"min", pt(e.min_point)}, {"max", pt(e.max_point)}, {"cells", e.cells},
                         {"missing", e.missing}});
    } catch (const NumericalError& e) {
      regions.push_back({{"region", k}, {"error", e.what()}});
    }
  }
  json failures = json::array();
  for (const auto& f : g.failures)
    failures.push_back({{"omega_m", num(g.omega_m_axis[f.i])}, {"b", num(g.b_axis[f.j])}, {"error", f.message}});
  out.json_file("extrema.json", {{"omega", num(g.omega)}, {"regions", regions}, {"failures", failures}});
  ctx.grids["density"] = grid_json(c.density.grid);
  ctx.grids["sweep"] = {{"omega_m", {num(c.sweep.axes.omega_m.min), num(c.sweep.axes.omega_m.max), c.sweep.axes.omega_m.count}},
                        {"b", {num(c.sweep.axes.b.min), num(c.sweep.axes.b.max), c.sweep.axes.b.count}}};
  if (!g.failures.empty()) std::cerr << "warning: " << g.failures.size() << " sweep cells failed (see extrema.json)\n";
}

void write_manifest(const Context& ctx, const std::string& command, const fs::path& config, const Output& out,
                    const std::string& started) {
  json snap = json::object();
  for (const auto& [sec, kv] : ctx.cfg.snapshot)
    for (const auto& [k, v] : kv) snap[sec][k] = v;
  json m = {{"tool", "fmpair"},
            {"version", kVersion},
            {"command", command},
            {"config_path", config.string()},
            {"config", snap},
            {"field", {{"E0", num(ctx.cfg.field.E0)}, {"omega", num(ctx.cfg.field.omega)},
                       {"tau", num(ctx.cfg.field.tau)}, {"omega_m", num(ctx.cfg.field.omega_m)},
                       {"b", num(ctx.cfg.field.b)}, {"t_span", num(ctx.cfg.field.half_window())}}},
            {"tolerances", {{"rel", num(ctx.cfg.tol.rel)}, {"abs", num(ctx.cfg.tol.abs)}}},
            {"grids", ctx.grids},
            {"workers", ctx.workers},
            {"started", started},
            {"finished", utc_now()},
            {"outputs", out.files()}};
  std::ofstream f(out.dir() / kManifest);
  if (!f) throw IoError("cannot write " + (out.dir() / kManifest).string());
  f << m.dump(2) << "\n";
  if (!f) throw IoError("write failed for " + (out.dir() / kManifest).string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pair production in frequency-modulated fields"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  unsigned workers = default_workers();
  std::optional<double> tol_rel, tol_abs;
  bool resume = false;
  app.add_option("--config", config_path, "INI config file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tol-rel", tol_rel, "ODE relative tolerance");
  app.add_option("--tol-abs", tol_abs, "ODE absolute tolerance");
  app.add_flag("--resume", resume, "sweep: reuse cells from the checkpoint");

  using Handler = void (*)(Context&, Output&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"field", "E(t), A(t) samples and the field spectrum", cmd_field},
      {"mode", "single-momentum trajectory", cmd_mode},
      {"spectrum", "momentum spectrum, peaks and photon assignments", cmd_spectrum},
      {"density", "number density", cmd_density},
      {"density-scan", "unmodulated density against carrier frequency", cmd_density_scan},
      {"turning", "complex turning points and |Omega|^2 grid", cmd_turning},
      {"sweep", "density over the (omega_m, b) plane with regional extrema", cmd_sweep},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const std::string started = utc_now();
    Context ctx;
    ctx.cfg = load_config(config_path);
    if (tol_rel) ctx.cfg.tol.rel = *tol_rel;
    if (tol_abs) ctx.cfg.tol.abs = *tol_abs;
    validate(ctx.cfg.tol);
    ctx.workers = workers;
    ctx.resume = resume;
    for (const auto& [name, help, fn] : commands) {
      if (!app.got_subcommand(name)) continue;
      if (resume && name != "sweep") throw ConfigError("--resume applies to the sweep subcommand only");
      Output out(out_dir);
      fn(ctx, out);
      write_manifest(ctx, name, config_path, out, started);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
