#include <gtest/gtest.h>

#include <sstream>

#include "fmpair/config.hpp"

using namespace fmpair;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

TEST(Config, EmptyGivesDefaults) {
  const auto c = parse("");
  EXPECT_EQ(c.field.E0, 0.1);
  EXPECT_EQ(c.field.omega, 0.5);
  EXPECT_EQ(c.field.tau, 100.0);
  EXPECT_EQ(c.density.grid.step, 5e-3);
  EXPECT_EQ(c.spectrum.peak_floor, 1e-5);
  EXPECT_FALSE(c.turning.box.has_value());
  EXPECT_TRUE(c.sweep.alpha_levels.empty());
  EXPECT_TRUE(c.snapshot.empty());
}

TEST(Config, ReadsValuesAndKeepsSnapshot) {
  const auto c = parse(
      "[field]\nomega = 0.5\nomega_m = 0.07\nb = 1\n"
      "[qve]\ntol_rel = 1e-9\n"
      "[turning]\nim_max = 6\n"
      "[sweep]\nalpha_levels = 0.1, 0.32, 1\nb_count = 11\nrestrict_range = false\n");
  EXPECT_EQ(c.field.omega_m, 0.07);
  EXPECT_EQ(c.field.b, 1.0);
  EXPECT_EQ(c.tol.rel, 1e-9);
  ASSERT_TRUE(c.turning.box.has_value());
  EXPECT_EQ(c.turning.box->im_max, 6.0);
  EXPECT_EQ(c.turning.box->re_max, 300.0);
  EXPECT_EQ(c.sweep.alpha_levels, (std::vector<double>{0.1, 0.32, 1.0}));
  EXPECT_EQ(c.sweep.axes.b.count, 11u);
  EXPECT_FALSE(c.sweep.axes.restrict_range);
  EXPECT_EQ(c.snapshot.at("field").at("omega_m"), "0.07");
}

TEST(Config, RejectsUnknownNames) {
  EXPECT_THROW(parse("[field]\nomega_M = 0.1\n"), ConfigError);
  EXPECT_THROW(parse("[fields]\nomega = 0.1\n"), ConfigError);
  EXPECT_THROW(parse("omega = 0.1\n"), ConfigError);
}

TEST(Config, RejectsMalformedValues) {
  EXPECT_THROW(parse("[field]\nomega = fast\n"), ConfigError);
  EXPECT_THROW(parse("[field]\nomega = 0.5 0.6\n"), ConfigError);
  EXPECT_THROW(parse("[field]\nallow_fast_modulation = maybe\n"), ConfigError);
  EXPECT_THROW(parse("[sweep]\nalpha_levels = 0.1,,1\n"), ConfigError);
  EXPECT_THROW(parse("[field\nomega = 0.5\n"), ConfigError);
}

TEST(Config, ValidatesPhysics) {
  EXPECT_THROW(parse("[field]\ntau = -1\n"), ConfigError);
  EXPECT_THROW(parse("[field]\nomega_m = 0.6\n"), ConfigError);
  EXPECT_NO_THROW(parse("[field]\nomega_m = 0.6\nallow_fast_modulation = true\n"));
  EXPECT_THROW(parse("[qve]\ntol_rel = 0\n"), ConfigError);
  EXPECT_THROW(parse("[density]\nstep = 0\n"), ConfigError);
  EXPECT_THROW(parse("[sweep]\nb_max = 20\n"), ConfigError);
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/fmpair.ini"), IoError);
}

TEST(Config, ResolutionDefault) {
  FieldConfig f;
  EXPECT_EQ(resolve_resolution(0.0, f), 1e-3);
  f.omega_m = 0.005;
  EXPECT_DOUBLE_EQ(resolve_resolution(0.0, f), 5e-4);
  EXPECT_EQ(resolve_resolution(2e-3, f), 2e-3);
}
