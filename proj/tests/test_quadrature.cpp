#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "fmpair/quadrature.hpp"

using namespace fmpair;

TEST(Quadrature, GaussianAgainstErf) {
  auto g = [](double x) { return std::exp(-x * x); };
  const double exact = std::sqrt(std::numbers::pi) / 2.0 * std::erf(3.0);
  EXPECT_NEAR(quad::integrate<double>(g, 0.0, 3.0, 1e-14), exact, 1e-14);
}

TEST(Quadrature, ComplexIntegrand) {
  // ∫_0^π e^{ix} dx = 2i
  auto f = [](double x) { return std::exp(std::complex<double>(0.0, x)); };
  const auto r = quad::integrate<double>(f, 0.0, std::numbers::pi, 1e-13);
  EXPECT_NEAR(r.real(), 0.0, 1e-13);
  EXPECT_NEAR(r.imag(), 2.0, 1e-13);
}

TEST(Quadrature, ThrowsWhenToleranceUnreachable) {
  auto f = [](double x) { return 1.0 / std::sqrt(x); };
  EXPECT_THROW(quad::integrate<double>(f, 0.0, 1.0, 1e-15, 0.0, 2), NumericalError);
}

TEST(Quadrature, OrderedGaussLegendre) {
  std::vector<double> seen;
  auto f = [&](double x) {
    seen.push_back(x);
    return std::cos(x);
  };
  const double r = quad::gauss_legendre_ordered(f, 0.0, 2.0, 4);
  EXPECT_NEAR(r, std::sin(2.0), 1e-14);
  ASSERT_EQ(seen.size(), 40u);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_LT(seen[i - 1], seen[i]);
}
