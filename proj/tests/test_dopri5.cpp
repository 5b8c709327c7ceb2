#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fmpair/dopri5.hpp"

using namespace fmpair;

namespace {
auto no_limit = [](double, const auto&) { return 1e9; };
auto ignore = [](double, const auto&) {};
}  // namespace

TEST(Dopri5, ExponentialDecay) {
  ode::Vec<1> y{1.0};
  auto rhs = [](double, const ode::Vec<1>& s) { return ode::Vec<1>{-2.0 * s[0]}; };
  ode::integrate<1>(rhs, 0.0, 3.0, y, {1e-11, 1e-14}, no_limit, ignore);
  EXPECT_NEAR(y[0], std::exp(-6.0), 1e-12);
}

TEST(Dopri5, ErrorScalesWithTolerance) {
  auto rhs = [](double, const ode::Vec<2>& s) { return ode::Vec<2>{s[1], -s[0]}; };
  double last = 1.0;
  for (double rel : {1e-6, 1e-8, 1e-10}) {
    ode::Vec<2> y{1.0, 0.0};
    ode::integrate<2>(rhs, 0.0, 20.0 * std::numbers::pi, y, {rel, rel * 1e-3}, no_limit, ignore);
    const double err = std::hypot(y[0] - 1.0, y[1]);
    EXPECT_LT(err, 1000.0 * rel);
    EXPECT_LT(err, last);
    last = err;
  }
}

TEST(Dopri5, ObserverAndStepCap) {
  ode::Vec<1> y{0.0};
  auto rhs = [](double, const ode::Vec<1>&) { return ode::Vec<1>{1.0}; };
  int calls = 0;
  double prev = -1.0;
  bool capped = true;
  auto obs = [&](double t, const ode::Vec<1>&) {
    if (calls++ && t - prev > 0.1 + 1e-12) capped = false;
    prev = t;
  };
  const auto st = ode::integrate<1>(rhs, 0.0, 1.0, y, {}, [](double, const auto&) { return 0.1; }, obs);
  EXPECT_TRUE(capped);
  EXPECT_EQ(calls, st.accepted + 1);
  EXPECT_DOUBLE_EQ(prev, 1.0);
  EXPECT_NEAR(y[0], 1.0, 1e-14);
}

TEST(Dopri5, StepUnderflowReportsTime) {
  // y' = y², y(0) = 1 blows up at t = 1
  ode::Vec<1> y{1.0};
  auto rhs = [](double, const ode::Vec<1>& s) { return ode::Vec<1>{s[0] * s[0]}; };
  try {
    ode::integrate<1>(rhs, 0.0, 2.0, y, {1e-10, 1e-14}, no_limit, ignore);
    FAIL() << "expected StepUnderflow";
  } catch (const StepUnderflow& e) {
    EXPECT_NEAR(e.time(), 1.0, 1e-3);
  }
}
