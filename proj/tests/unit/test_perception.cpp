#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "dlo/dataset.hpp"
#include "dlo/error.hpp"
#include "dlo/metrics.hpp"
#include "dlo/perception.hpp"
#include "helpers.hpp"

namespace dlo {
namespace {

bool eight_connected(const std::vector<Pixel>& pixels) {
  if (pixels.empty()) return true;
  std::set<std::pair<int, int>> left;
  for (const auto& p : pixels) left.insert({p.u, p.v});
  std::deque<std::pair<int, int>> q{{pixels[0].u, pixels[0].v}};
  left.erase(q.front());
  while (!q.empty()) {
    const auto [u, v] = q.front();
    q.pop_front();
    for (int du = -1; du <= 1; ++du) {
      for (int dv = -1; dv <= 1; ++dv) {
        auto it = left.find({u + du, v + dv});
        if (it == left.end()) continue;
        q.push_back(*it);
        left.erase(it);
      }
    }
  }
  return left.empty();
}

Vec2 nearest_positive_oracle(const BinaryImage& img, const Vec2& p) {
  // Scan order (v, u) with strict improvement gives the documented tie rule.
  double best = 1e18;
  Vec2 out = p;
  for (const auto& px : img.positive_pixels()) {
    const Vec2 c(px.u + 0.5, px.v + 0.5);
    if ((c - p).squaredNorm() < best) {
      best = (c - p).squaredNorm();
      out = c;
    }
  }
  return out;
}

TEST(Skeleton, ThreePixelBandThinsToLine) {
  const auto img = test::band(60, 30, 10, 12, 5, 40);
  const auto s = skeletonize(img);
  ASSERT_EQ(s.endpoints.size(), 2u);
  std::set<int> rows;
  for (const auto& p : s.pixels) rows.insert(p.v);
  EXPECT_EQ(rows, std::set<int>{11});
  EXPECT_GE(s.pixels.size(), 30u);
}

TEST(Skeleton, SinglePixel) {
  BinaryImage img(5, 5);
  img.set(2, 3);
  const auto s = skeletonize(img);
  ASSERT_EQ(s.pixels.size(), 1u);
  EXPECT_EQ(s.pixels[0], (Pixel{2, 3}));
  EXPECT_TRUE(s.endpoints.empty());
}

TEST(Skeleton, EmptyImageThrows) { EXPECT_THROW(skeletonize(BinaryImage(4, 4)), EmptyInputError); }

TEST(Skeleton, SubsetAndConnectedOnGeneratedSamples) {
  const GenConfig c;
  for (int i = 0; i < 200; ++i) {
    const auto& img = generate_sample(c, sample_seed(c, static_cast<std::size_t>(i))).image;
    const auto s = skeletonize(img);
    for (const auto& p : s.pixels) ASSERT_TRUE(img.get(p.u, p.v));
    EXPECT_TRUE(eight_connected(s.pixels)) << "sample " << i;
  }
}

TEST(Skeleton, PixelCountTracksCentreline) {
  Rng rng(17);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    auto w = test::random_walk(rng, 12, 4.0, 0.25);
    w = transform_curve(w, Vec2(64, 32) - w.centroid(), 0.0);
    bool inside = true;
    for (const auto& p : w.points()) inside = inside && p.x() > 3 && p.x() < 125 && p.y() > 3 && p.y() < 61;
    if (!inside) continue;
    const auto img = rasterize_image_frame(w, rng.uniform(0.8, 2.0), {128, 64});
    // An 8-connected centre line has one pixel per unit of Chebyshev length.
    const auto dense = w.densified(0.05);
    double cheb = 1.0;
    for (std::size_t i = 1; i < dense.size(); ++i) {
      const Vec2 d = (dense[i] - dense[i - 1]).cwiseAbs();
      cheb += std::max(d.x(), d.y());
    }
    const double n = static_cast<double>(skeletonize(img).pixels.size());
    EXPECT_NEAR(n / cheb, 1.0, 0.2) << "case " << t;
    ++checked;
  }
  EXPECT_GE(checked, 50);
}

TEST(Detect, StraightBandGivesEquallySpacedPoints) {
  const auto img = test::band(100, 30, 14, 16, 10, 89);
  const auto k = detect_keypoints_geometric(img, 16);
  ASSERT_EQ(k.size(), 16u);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(k[j].y(), 15.5, 1e-12);
  for (std::size_t j = 1; j < 16; ++j) EXPECT_NEAR(k[j].x() - k[j - 1].x(), (k[15].x() - k[0].x()) / 15.0, 1.0);
  EXPECT_LT(k[0].x(), k[15].x());
}

TEST(Detect, UShapeStartsOnLeftLimb) {
  // Goal-style U: left limb down, bottom, right limb up.
  std::vector<Vec2> pts;
  for (int i = 0; i <= 20; ++i) pts.emplace_back(30, 8 + i);
  for (int i = 1; i <= 40; ++i) pts.emplace_back(30 + i, 28);
  for (int i = 1; i <= 20; ++i) pts.emplace_back(70, 28 - i);
  const PolylineCurve curve(pts);
  const auto img = rasterize_image_frame(curve, 1.2, {100, 40});
  const auto truth = sample_keypoints(curve, 16, kPi / 4, Frame::image);
  const auto k = detect_keypoints_geometric(img, 16);
  EXPECT_LT(k[0].x(), 40.0);
  EXPECT_LT(keypoint_error(k, truth), 3.0);
  // Walk order: projections on the truth polyline are monotone.
  const auto cum = curve.cumulative_length();
  double last = -1.0;
  for (const auto& p : k.points) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if ((curve[i] - p).squaredNorm() < (curve[best] - p).squaredNorm()) best = i;
    }
    EXPECT_GE(cum[best], last);
    last = cum[best];
  }
}

TEST(Detect, CircleIsAmbiguous) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= 64; ++i) pts.emplace_back(50 + 15 * std::cos(i * kPi / 32), 30 + 15 * std::sin(i * kPi / 32));
  const auto img = rasterize_image_frame(PolylineCurve(pts), 1.0, {100, 60});
  try {
    detect_keypoints_geometric(img, 16);
    FAIL();
  } catch (const AmbiguityError& e) {
    EXPECT_EQ(e.endpoint_count(), 0);
  }
}

TEST(Detect, FirstPointIsLeftEndOnGeneratedSamples) {
  const GenConfig c;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto s = generate_sample(c, sample_seed(c, i));
    KeypointSequence k;
    try {
      k = detect_with_cleanup(s.image, 16);
    } catch (const Error&) {
      continue;
    }
    const auto ends = prune_spurs(skeletonize(s.image)).endpoints;
    if (ends.size() != 2) continue;
    EXPECT_EQ(k[0], Vec2(ends[0].u + 0.5, ends[0].v + 0.5));
  }
}

TEST(Finetune, OnBodyPointsUnchanged) {
  const auto img = test::band(40, 20, 8, 11);
  KeypointSequence k{{{2.5, 9.5}, {10.5, 8.5}, {30.5, 11.5}}, Frame::image};
  EXPECT_EQ(finetune_keypoints(k, img).points, k.points);
}

TEST(Finetune, InteriorPointMovesAlongNormal) {
  const auto img = test::band(40, 20, 8, 11);
  // Two pixels above the band; neighbours on the band give a horizontal tangent.
  KeypointSequence k{{{5.5, 9.5}, {20.5, 5.5}, {35.5, 9.5}}, Frame::image};
  const auto f = finetune_keypoints(k, img);
  // Vertical ray oracle: first positive cell below in 0.5 px steps.
  double t = 0.5;
  while (!img.at(k[1] + Vec2(0, t))) t += 0.5;
  EXPECT_EQ(f[1], k[1] + Vec2(0, t));
  EXPECT_EQ(f[1].x(), 20.5);
  EXPECT_TRUE(img.at(f[1]));
}

TEST(Finetune, EndSnapsToNearestPositivePixel) {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const auto img = test::random_image(rng, 20, 15, 0.05);
    if (img.empty()) continue;
    const Vec2 p(rng.uniform(0, 20), rng.uniform(0, 15));
    EXPECT_EQ(nearest_positive_pixel(img, p), nearest_positive_oracle(img, p));
    KeypointSequence k{{p, Vec2(10, 7), Vec2(3, 3)}, Frame::image};
    const auto f = finetune_keypoints(k, img);
    if (!img.at(p)) EXPECT_EQ(f[0], nearest_positive_oracle(img, p));
  }
  EXPECT_THROW(nearest_positive_pixel(BinaryImage(3, 3), Vec2(1, 1)), EmptyInputError);
  EXPECT_THROW(finetune_keypoints(KeypointSequence{{{1, 1}, {2, 2}}, Frame::image}, BinaryImage(3, 3)),
               EmptyInputError);
}

TEST(Finetune, AlwaysOnBodyAndNotWorseOnBand) {
  const GenConfig c;
  Rng rng(33);
  for (std::size_t i = 0; i < 300; ++i) {
    const auto s = generate_sample(c, sample_seed(c, i));
    KeypointSequence raw = s.keypoints;
    for (auto& p : raw.points) p += Vec2(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const auto f = finetune_keypoints(raw, s.image);
    for (const auto& p : f.points) EXPECT_TRUE(s.image.at(p));
  }
  // Constructed band: truth on the centre row, raw error below the band thickness.
  const auto img = test::band(80, 30, 12, 17, 5, 74);
  KeypointSequence truth{{}, Frame::image};
  for (int j = 0; j < 10; ++j) truth.points.emplace_back(8.5 + 7 * j, 14.5);
  for (int t = 0; t < 200; ++t) {
    KeypointSequence raw = truth;
    for (std::size_t j = 1; j + 1 < raw.size(); ++j) raw.points[j].y() += rng.uniform(-5.5, 5.5);
    EXPECT_LE(keypoint_error(finetune_keypoints(raw, img), truth), keypoint_error(raw, truth) + 1e-12);
  }
}

TEST(Errors, CornerAndKeypointError) {
  Rng rng(4);
  KeypointSequence a{test::random_points(rng, 16, 0, 100), Frame::image};
  EXPECT_EQ(corner_error(a, a), 0.0);
  EXPECT_EQ(keypoint_error(a, a), 0.0);
  KeypointSequence b = a;
  for (auto& p : b.points) p += Vec2(3, 4);
  EXPECT_DOUBLE_EQ(corner_error(b, a), 5.0);
  EXPECT_NEAR(keypoint_error(b, a), 5.0, 1e-12);
  KeypointSequence c{test::random_points(rng, 16, 0, 100), Frame::image};
  EXPECT_EQ(keypoint_error(a, c), keypoint_error(c, a));
  EXPECT_GT(keypoint_error(a, c), 0.0);
  KeypointSequence short_seq{{{0, 0}}, Frame::image};
  EXPECT_THROW(keypoint_error(a, short_seq), ParameterError);
  EXPECT_THROW(corner_error(a, short_seq), ParameterError);
}

TEST(Reconstruct, TwoPointBandAndIdempotence) {
  KeypointSequence two{{{10, 10}, {50, 10}}, Frame::image};
  const auto img = reconstruct_from_keypoints(two, 1.0, {64, 32});
  EXPECT_TRUE(img.get(30, 10));
  EXPECT_FALSE(img.get(30, 14));
  const GenConfig c;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto s = generate_sample(c, sample_seed(c, i));
    const auto rec = reconstruct_from_keypoints(s.keypoints, s.meta.half_thickness_px, s.image.dims());
    const auto rec2 = reconstruct_from_keypoints(s.keypoints, s.meta.half_thickness_px, rec.dims());
    EXPECT_GE(iou(rec2, rec), iou(rec, s.image));
  }
}

TEST(Cleanup, ClosingFillsSinglePixelGap) {
  auto img = test::band(40, 20, 8, 10, 5, 34);
  img.set(20, 9, false);
  const auto closed = morphological_close(img);
  EXPECT_TRUE(closed.get(20, 9));
  for (const auto& p : img.positive_pixels()) EXPECT_TRUE(closed.get(p.u, p.v));
}

}  // namespace
}  // namespace dlo
