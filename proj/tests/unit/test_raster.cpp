#include <gtest/gtest.h>

#include <cmath>

#include "dlo/error.hpp"
#include "dlo/raster.hpp"
#include "helpers.hpp"

namespace dlo {
namespace {

const Roi kRoi{-0.3, -0.15, 0.3, 0.15};
const ImageDims kDims{128, 64};

TEST(WorldImageMap, CentreAndCorners) {
  const WorldImageMap map(kRoi, kDims);
  EXPECT_NEAR((map.to_image({0.0, 0.0}) - Vec2(64, 32)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((map.to_image({-0.3, 0.15}) - Vec2(0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((map.to_image({0.3, -0.15}) - Vec2(128, 64)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((map.to_world({128, 0}) - Vec2(0.3, 0.15)).norm(), 0.0, 1e-12);
}

TEST(WorldImageMap, RoundTrip) {
  const WorldImageMap map(kRoi, kDims);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 w(rng.uniform(-0.3, 0.3), rng.uniform(-0.15, 0.15));
    EXPECT_LT((map.to_image(map.to_world(map.to_image(w))) - map.to_image(w)).norm(), 1e-9);
    EXPECT_LT((map.to_world(map.to_image(w)) - w).norm() * map.scale_x(), 1.0);
  }
}

TEST(WorldImageMap, DegenerateRoiThrows) {
  EXPECT_THROW(WorldImageMap(Roi{0, 0, 0, 1}, kDims), ParameterError);
  EXPECT_THROW(rasterize(PolylineCurve({{0, 0}, {1, 1}}), 0.1, kDims, Roi{0, 0, 1, 0}), ParameterError);
}

TEST(Rasterize, SinglePointAtCentreSetsOnePixel) {
  // A zero-length curve cannot be a polyline, so use a tiny segment inside one cell.
  const PolylineCurve c({{0.0, 0.0}, {1e-6, -1e-6}});
  const auto img = rasterize(c, 0.0, kDims, kRoi);
  EXPECT_EQ(img.count(), 1u);
  EXPECT_TRUE(img.get(64, 32));
}

TEST(Rasterize, FullWidthBandCount) {
  // Centre line at a row boundary with thickness spanning k rows on each side.
  for (int k = 1; k <= 4; ++k) {
    const double px = 0.3 / 64.0;
    const PolylineCurve c({{-0.3, 0.0}, {0.3, 0.0}});
    const auto img = rasterize(c, k * px - 1e-9, kDims, kRoi);
    std::size_t direct = 0;
    for (int v = 0; v < 64; ++v) {
      for (int u = 0; u < 128; ++u) direct += img.get(u, v) ? 1 : 0;
    }
    EXPECT_EQ(direct, img.count());
    const double expect = 128.0 * 2 * k;
    EXPECT_LE(std::abs(static_cast<double>(img.count()) - expect), 2.0 * 128);
  }
}

TEST(Rasterize, OutsideRoiIsEmpty) {
  const PolylineCurve c({{1.0, 1.0}, {2.0, 1.0}});
  EXPECT_TRUE(rasterize(c, 0.01, kDims, kRoi).empty());
}

TEST(Rasterize, CoverageAndProximityProperties) {
  Rng rng(2);
  const WorldImageMap map(kRoi, kDims);
  for (int t = 0; t < 40; ++t) {
    auto w = test::random_walk(rng, 12, 0.04, 0.8);
    w = transform_curve(w, -w.centroid(), 0.0);
    const double ht = rng.uniform(0.0, 0.01);
    const auto img = rasterize(w, ht, kDims, kRoi);
    for (const auto& p : w.points()) {
      const Vec2 q = map.to_image(p);
      if (q.x() >= 0 && q.y() >= 0 && q.x() < 128 && q.y() < 64) EXPECT_TRUE(img.at(q));
    }
    // Every set pixel centre lies within ht plus one pixel diagonal of the curve.
    const double tol = ht + std::sqrt(2.0) / map.scale_x();
    for (const auto& px : img.positive_pixels()) {
      const Vec2 centre = map.to_world({px.u + 0.5, px.v + 0.5});
      double best = 1e9;
      for (std::size_t i = 1; i < w.size(); ++i) best = std::min(best, point_segment_distance(centre, w[i - 1], w[i]));
      EXPECT_LE(best, tol);
    }
  }
}

TEST(BinaryImage, BoundsAndCounting) {
  BinaryImage img(4, 3);
  EXPECT_FALSE(img.get(-1, 0));
  EXPECT_FALSE(img.get(4, 0));
  EXPECT_THROW(img.set(4, 0), ParameterError);
  EXPECT_THROW(BinaryImage(0, 3), ParameterError);
  img.set(1, 2);
  img.set(3, 0);
  EXPECT_EQ(img.count(), 2u);
  const auto pos = img.positive_pixels();
  ASSERT_EQ(pos.size(), 2u);
  EXPECT_EQ(pos[0], (Pixel{3, 0}));
  EXPECT_TRUE(img.at({1.99, 2.0}));
  EXPECT_FALSE(img.at({2.0, 2.0}));
}

}  // namespace
}  // namespace dlo
