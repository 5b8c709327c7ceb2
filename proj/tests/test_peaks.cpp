#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fmpair/peaks.hpp"

using namespace fmpair;

TEST(Peaks, ParabolicRefinementIsExactForParabola) {
  std::vector<double> x, y;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(0.1 * i);
    y.push_back(3.0 - (x.back() - 1.234) * (x.back() - 1.234));
  }
  const auto m = local_maxima(x, y, 0.0);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NEAR(m[0].x, 1.234, 1e-12);
  EXPECT_NEAR(m[0].y, 3.0, 1e-12);
}

TEST(Peaks, FloorAndPlateau) {
  const std::vector<double> x{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> y{0, 1, 0, 0.01, 0, 2, 2, 0, 0};
  const auto m = local_maxima(x, y, 0.1);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_DOUBLE_EQ(m[0].x, 1.0);
  EXPECT_NEAR(m[1].x, 5.5, 1e-12);  // plateau reported at its centre
}
