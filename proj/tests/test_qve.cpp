#include <gtest/gtest.h>

#include <cmath>

#include "fmpair/qve.hpp"

using namespace fmpair;

namespace {

FieldConfig short_pulse() {
  FieldConfig c;
  c.tau = 10.0;
  return c;
}

}  // namespace

TEST(Qve, RhsAtRest) {
  const Field f(FieldConfig{});
  const auto d = rhs(f, Momentum(0.3, 0.4), {0.0, 0.0, 0.0, 0.0});
  const double eps = std::sqrt(1.0 + 0.16);
  const double k = 0.3 - f.A(0.0);
  const double w = f.E(0.0) * eps / (eps * eps + k * k);
  EXPECT_DOUBLE_EQ(d.df, 0.0);
  EXPECT_DOUBLE_EQ(d.du, w);
  EXPECT_DOUBLE_EQ(d.dv, 0.0);
}

TEST(Qve, ZeroFieldCreatesNothing) {
  FieldConfig c;
  c.E0 = 0.0;
  const auto r = integrate_mode(Field(c), Momentum(0.1));
  EXPECT_EQ(r.f, 0.0);
}

TEST(Qve, BlochSphereInvariantAndPauliBound) {
  // (1 - 2f)² + u² + v² = 1 is conserved by the (f, u, v) system
  FieldConfig c;
  c.E0 = 0.3;
  c.tau = 10.0;
  ModeOptions opt;
  opt.record_trajectory = true;
  const auto r = integrate_mode(Field(c), Momentum(0.2, 0.1), {}, opt);
  double worst = 0.0;
  for (const auto& s : r.trajectory) {
    const double g = (1 - 2 * s.f) * (1 - 2 * s.f) + s.u * s.u + s.v * s.v;
    worst = std::max(worst, std::abs(g - 1.0));
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_GE(r.f_min, -1e-9);
  EXPECT_LE(r.f_max, 1.0 + 1e-9);
  EXPECT_GT(r.f, 0.0);
}

TEST(Qve, OracleConvergesToIntegrator) {
  const Field f(short_pulse());
  for (double p : {0.08, -0.2}) {
    const double ref = integrate_mode(f, Momentum(p)).f;
    const double e1 = std::abs(oracle_direct(f, Momentum(p), 4000) - ref);
    const double e2 = std::abs(oracle_direct(f, Momentum(p), 8000) - ref);
    const double e3 = std::abs(oracle_direct(f, Momentum(p), 16000) - ref);
    // at least second order: halving dt cuts the error by >= 3
    EXPECT_GT(e1 / e2, 3.0) << "p=" << p;
    EXPECT_GT(e2 / e3, 3.0) << "p=" << p;
    EXPECT_LT(e3 / ref, 1e-4) << "p=" << p;
  }
}

TEST(Qve, ToleranceRefinementIsStable) {
  const Field f(short_pulse());
  const double coarse = integrate_mode(f, Momentum(0.3), {1e-8, 1e-13}).f;
  const double fine = integrate_mode(f, Momentum(0.3), {1e-11, 1e-15}).f;
  EXPECT_NEAR(coarse, fine, 1e-5 * fine);
}

TEST(Qve, AnchorShiftInvariance) {
  auto c = short_pulse();
  const double a = integrate_mode(Field(c), Momentum(0.08)).f;
  c.t_span = 10.0 * c.tau;
  const double b = integrate_mode(Field(c), Momentum(0.08)).f;
  EXPECT_NEAR(a, b, 1e-6 * a);
}

TEST(Qve, PlateauReached) {
  const auto r = integrate_mode(Field(short_pulse()), Momentum(0.0));
  EXPECT_TRUE(r.plateau_ok) << r.plateau_variation;
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Qve, MirrorSymmetryForEvenField) {
  // E even gives A(t) + A(-t) = A(+T), so f is symmetric about p = A(+T) / 2
  const Field f(short_pulse());
  const double centre = 0.5 * f.A(f.config().half_window());
  const double a = integrate_mode(f, Momentum(centre + 0.25)).f;
  const double b = integrate_mode(f, Momentum(centre - 0.25)).f;
  EXPECT_NEAR(a, b, 1e-6 * a);
}

TEST(Qve, ToleranceValidation) {
  const Field f(short_pulse());
  EXPECT_THROW(integrate_mode(f, Momentum(0.0), {1e-3, 1e-14}), ConfigError);
  EXPECT_THROW(integrate_mode(f, Momentum(0.0), {1e-10, 1e-5}), ConfigError);
  EXPECT_THROW(oracle_direct(f, Momentum(0.0), 1), ConfigError);
}

TEST(Qve, TransverseMomentumEnergy) {
  const Momentum m(0.1, -0.75);
  EXPECT_DOUBLE_EQ(m.p_perp(), 0.75);
  EXPECT_DOUBLE_EQ(m.eps_perp(), 1.25);
  const Field f(FieldConfig{});
  EXPECT_NEAR(total_energy(f, m, -f.config().half_window()), std::hypot(1.25, 0.1), 1e-15);
}
