#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

namespace pl = nre::plot;

namespace {

nre::NREModel xor_model(bool deep) {
  const auto d = nre::gen_rotated_xor(600, 30.0, 0.1, 4);
  nre::TrainConfig cfg;
  cfg.max_depth = 3;
  cfg.epochs = 60;
  cfg.deep = deep;
  return nre::nre_train(d, cfg).model;
}

}  // namespace

TEST(Plot, GridAgreesWithPointwisePrediction) {
  const auto m = xor_model(true);
  const pl::Bounds b{-3, 3, -2, 4};
  const auto g = pl::classify_grid(m, b, 60);
  ASSERT_EQ(g.cells.size(), 3600u);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const std::size_t ix = rng() % 60, iy = rng() % 60;
    const auto c = g.center(ix, iy);
    const double s = nre::nre_score(m, c);
    EXPECT_EQ(g.at(ix, iy), s > 0 ? 1 : (s < 0 ? -1 : 0));
    if (s != 0.0) EXPECT_EQ(g.at(ix, iy), nre::nre_predict(m, c));
  }
}

TEST(Plot, ShallowRuleSupportsAreConvex) {
  const auto m = xor_model(false);
  const pl::Bounds b{-3, 3, -3, 3};
  for (std::size_t r = 0; r < m.rules.size(); ++r) {
    const auto g = pl::classify_grid(m, b, 80, r);
    EXPECT_TRUE(pl::is_grid_convex(g)) << "rule " << r;
  }
}

TEST(Plot, ConvexityCheckRejectsAnLShape) {
  pl::Grid g{{0, 4, 0, 4}, 4, std::vector<std::int8_t>(16, 0)};
  for (std::size_t i = 0; i < 4; ++i) {
    g.cells[0 * 4 + i] = 1;  // bottom row
    g.cells[i * 4 + 0] = 1;  // left column
  }
  EXPECT_FALSE(pl::is_grid_convex(g));
  g.cells.assign(16, 0);
  for (std::size_t iy = 1; iy < 3; ++iy)
    for (std::size_t ix = 0; ix < 4; ++ix) g.cells[iy * 4 + ix] = -1;
  EXPECT_TRUE(pl::is_grid_convex(g));
  EXPECT_TRUE(pl::is_grid_convex(g, -1));
}

TEST(Plot, RuleOutsideWindowHasEmptySupport) {
  nre::NREModel m;
  m.standardization = nre::StandardizationParams::identity(2);
  nre::NeuralRule r({0}, 1, false);
  r.w1(0, 0) = 1.0;
  r.b1(0) = -10.0;  // active only for x0 > 10
  r.c() = 1.0;
  m.rules.push_back(r);
  const auto g = pl::classify_grid(m, {-1, 1, -1, 1}, 20, 0);
  EXPECT_EQ(g.count(0), 400u);
  EXPECT_TRUE(pl::is_grid_convex(g));
}

TEST(Plot, SvgIsDeterministic) {
  const auto d = nre::gen_rotated_xor(200, 30.0, 0.1, 4);
  const auto m = xor_model(false);
  const auto g = pl::classify_grid(m, pl::data_bounds(d), 40);
  const auto a = pl::render_svg(g, d);
  EXPECT_EQ(a, pl::render_svg(pl::classify_grid(m, pl::data_bounds(d), 40), d));
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  std::size_t circles = 0;
  for (auto pos = a.find("<circle"); pos != std::string::npos; pos = a.find("<circle", pos + 1)) ++circles;
  EXPECT_EQ(circles, d.rows());
}

TEST(Plot, RejectsNonPlanarInputs) {
  std::mt19937_64 rng(2);
  const auto d3 = nre_test::random_continuous_dataset(rng, 100, 3);
  EXPECT_THROW(pl::data_bounds(d3), nre::DataError);
  nre::TrainConfig cfg;
  cfg.epochs = 2;
  const auto m3 = nre::nre_train(d3, cfg).model;
  EXPECT_THROW(pl::classify_grid(m3, {}, 10), nre::DataError);
  const auto m = xor_model(false);
  EXPECT_THROW(pl::classify_grid(m, {}, 10, m.rules.size()), std::out_of_range);
  EXPECT_THROW(pl::classify_grid(m, {}, 0), std::invalid_argument);
}
