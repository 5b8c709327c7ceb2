#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "fmpair/qve.hpp"
#include "fmpair/semiclassical.hpp"

using namespace fmpair;

namespace {

constexpr double kP1 = 0.08;  // first momentum peak of the baseline pulse

// searches are ~1 s each, so cache by (ω_m, b, p)
const TurningPointSet& roots(double omega_m, double b, double p) {
  static std::map<std::tuple<double, double, double>, TurningPointSet> cache;
  auto key = std::tuple{omega_m, b, p};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  FieldConfig c;
  c.omega_m = omega_m;
  c.b = b;
  const Field f(c);
  TurningOptions o;
  o.workers = 4;
  return cache.emplace(key, find_turning_points(f, Momentum(p), ComplexBox::around(c), o)).first->second;
}

// Im t at local minima along the Re-sorted root chain: the near-axis clusters
std::vector<double> cluster_centres(const TurningPointSet& s) {
  std::vector<double> out;
  const auto& p = s.points;
  for (std::size_t i = 1; i + 1 < p.size(); ++i)
    if (p[i].t.imag() < p[i - 1].t.imag() && p[i].t.imag() < p[i + 1].t.imag()) out.push_back(p[i].t.real());
  return out;
}

}  // namespace

TEST(TurningPoints, AreGenuineDistinctRoots) {
  const auto& s = roots(0.0, 0.0, kP1);
  ASSERT_GT(s.points.size(), 4u);
  const Field f{FieldConfig{}};
  const Momentum mom(kP1);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& tp = s.points[i];
    EXPECT_LT(tp.omega2, 1e-16);
    // independent residual in double
    const cplx k = kP1 - f.potential()(tp.t);
    EXPECT_LT(std::abs(1.0 + k * k), 1e-10);
    EXPECT_TRUE(s.search_box.contains(tp.t));
    EXPECT_GT(tp.K, 0.0);
    for (std::size_t j = i + 1; j < s.points.size(); ++j) EXPECT_GT(std::abs(tp.t - s.points[j].t), 1e-4);
    if (i) EXPECT_LE(s.points[i - 1].t.real(), tp.t.real());
  }
}

TEST(TurningPoints, MirrorSymmetricForUnmodulatedPulse) {
  // A is odd about t = 0 up to A(+inf), so p = A(+inf)/2 gives t -> -conj(t)
  FieldConfig c;
  const Field f(c);
  const double p = f.A(c.half_window()) / 2.0;
  const auto& s = roots(0.0, 0.0, p);
  for (const auto& tp : s.points) {
    const cplx mirror(-tp.t.real(), tp.t.imag());
    if (!s.search_box.contains(mirror)) continue;
    double best = 1e300;
    for (const auto& q : s.points) best = std::min(best, std::abs(q.t - mirror));
    EXPECT_LT(best, 1e-6) << tp.t;
  }
}

TEST(TurningPoints, MatchGridMinimum) {
  const auto& s = roots(0.0, 0.0, kP1);
  const auto& d = dominant_point(s);
  const Field f{FieldConfig{}};
  const ComplexBox local{d.t.real() - 2.0, d.t.real() + 2.0, 0.05, d.t.imag() + 1.0};
  const auto g = omega2_grid(f, Momentum(kP1), local, 81, 41);
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < g.re.size(); ++i)
    for (std::size_t j = 0; j < g.im.size(); ++j)
      if (g.at(i, j) < g.at(bi, bj)) bi = i, bj = j;
  EXPECT_LE(std::abs(g.re[bi] - d.t.real()), g.re[1] - g.re[0]);
  EXPECT_LE(std::abs(g.im[bj] - d.t.imag()), g.im[1] - g.im[0]);
}

TEST(TurningPoints, RealAxisBoundedByTransverseEnergy) {
  FieldConfig c;
  c.omega_m = 0.07;
  c.b = 1.0;
  const Field f(c);
  const Momentum mom(0.3, 0.4);
  const auto g = omega2_grid(f, mom, {-300.0, 300.0, 0.0, 1.0}, 1201, 2);
  for (std::size_t i = 0; i < g.re.size(); ++i) EXPECT_GE(g.at(i, 0), 1.16 * (1.0 - 1e-12));
}

TEST(TurningPoints, ActionStableUnderRefinement) {
  const auto& s = roots(0.0, 0.0, kP1);
  const Field f{FieldConfig{}};
  const Momentum mom(kP1);
  for (std::size_t i = 0; i < s.points.size(); i += std::max<std::size_t>(1, s.points.size() / 7)) {
    const auto& tp = s.points[i];
    const double k64 = action_K(f, mom, tp, 64);
    EXPECT_NEAR(tp.K, k64, 1e-8 * k64) << tp.t;
  }
}

TEST(TurningPoints, DominantRootIsClosestToAxis) {
  const auto& s = roots(0.0, 0.0, kP1);
  const auto& d = dominant_point(s);
  for (const auto& tp : s.points) EXPECT_GE(tp.t.imag(), d.t.imag() - 1e-12);
  // K grows with Im t among roots with nearly equal Re t
  auto lowest = std::min_element(s.points.begin(), s.points.end(),
                                 [](const auto& a, const auto& b) { return a.t.imag() < b.t.imag(); });
  EXPECT_EQ(&*lowest, &d);
}

TEST(TurningPoints, ThetaBoundedByEnergyRange) {
  const auto& s = roots(0.0, 0.0, kP1);
  const Field f{FieldConfig{}};
  const Momentum mom(kP1);
  for (std::size_t i = 0; i + 1 < s.points.size(); i += 5) {
    const double a = s.points[i].t.real();
    const double b = s.points[i + 1].t.real();
    if (b - a < 1e-6) continue;
    double lo = 1e300, hi = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double w = total_energy(f, mom, a + (b - a) * k / 400.0);
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    const double theta = s.thetas[i][i + 1];
    EXPECT_GE(theta, lo * (b - a) * (1.0 - 1e-6));
    EXPECT_LE(theta, hi * (b - a) * (1.0 + 1e-6));
    EXPECT_NEAR(theta, interference_theta(f, mom, s.points[i], s.points[i + 1]), 1e-9 * (1.0 + theta));
  }
}

TEST(TurningPoints, CarrierPeriodicity) {
  const auto& s = roots(0.0, 0.0, kP1);
  const double low = dominant_point(s).t.imag();
  std::vector<double> re;
  for (const auto& tp : s.points)
    if (tp.branch == 1 && tp.t.imag() < low + 0.3 && std::abs(tp.t.real()) < 60.0) re.push_back(tp.t.real());
  ASSERT_GE(re.size(), 4u);
  for (std::size_t i = 1; i < re.size(); ++i) EXPECT_NEAR(re[i] - re[i - 1], 2.0 * std::numbers::pi / 0.5, 0.05);
}

TEST(TurningPoints, ModulationClustersTightenWithFrequency) {
  // first cluster off centre sits near 2π/ω_m
  auto first = [](const std::vector<double>& c) {
    double r = 1e300;
    for (double x : c)
      if (std::abs(x) > 10.0) r = std::min(r, std::abs(x));
    return r;
  };
  const auto slow = cluster_centres(roots(0.07, 1.0, kP1));
  const auto fast = cluster_centres(roots(0.1, 1.0, kP1));
  ASSERT_GE(slow.size(), 3u);
  ASSERT_GE(fast.size(), 3u);
  EXPECT_LT(first(fast), first(slow));
  EXPECT_GT(fast.size(), slow.size());
  EXPECT_NEAR(first(fast), 2.0 * std::numbers::pi / 0.1, 5.0);
}

TEST(Semiclassical, SingleRootGivesExpMinus2K) {
  TurningPointSet s;
  s.points = {{cplx(0.0, 1.0), 0.0, 0.0, 1, 3.2}};
  s.thetas = {{0.0}};
  EXPECT_DOUBLE_EQ(semiclassical_f(s), std::exp(-6.4));
}

TEST(Semiclassical, TwoRootInterferenceWithinBounds) {
  const double K = 2.5;
  const double single = std::exp(-2.0 * K);
  for (double theta : {0.0, 0.3, std::numbers::pi / 2, 1.1, 7.9}) {
    TurningPointSet s;
    s.points = {{cplx(-5.0, 1.0), 0.0, 0.0, 1, K}, {cplx(5.0, 1.0), 0.0, 0.0, -1, K}};
    s.thetas = {{0.0, theta}, {theta, 0.0}};
    const double f = semiclassical_f(s);
    EXPECT_GE(f, -1e-18);
    EXPECT_LE(f, 4.0 * single * (1.0 + 1e-12));
    EXPECT_NEAR(f, 2.0 * single * (1.0 - std::cos(2.0 * theta)), 1e-15);
  }
}

TEST(Semiclassical, EmptySetRejected) {
  EXPECT_THROW(semiclassical_f(TurningPointSet{}), ConfigError);
  EXPECT_THROW(dominant_point(TurningPointSet{}), ConfigError);
}

TEST(Semiclassical, SearchValidation) {
  const Field f{FieldConfig{}};
  TurningOptions o;
  o.seeds_per_period = 2.0;
  EXPECT_THROW(find_turning_points(f, Momentum(0.0), ComplexBox{}, o), ConfigError);
  EXPECT_THROW(find_turning_points(f, Momentum(0.0), ComplexBox{-10, 10, 0, 20}), ConfigError);
  EXPECT_THROW(omega2_grid(f, Momentum(0.0), ComplexBox{}, 1, 10), ConfigError);
}

TEST(Semiclassical, PeakExceedsValley) {
  // p = 0 is a dark fringe of the baseline pulse, p1 the first bright one
  const double peak = semiclassical_f(roots(0.0, 0.0, kP1));
  const double valley = semiclassical_f(roots(0.0, 0.0, 0.0));
  EXPECT_GT(peak, 10.0 * std::abs(valley));
}
