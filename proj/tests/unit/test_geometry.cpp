#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dlo/error.hpp"
#include "dlo/geometry.hpp"
#include "helpers.hpp"

namespace dlo {
namespace {

TEST(FourierSegment, BiasOnlyIsHalfA0) {
  FourierSegment s;
  s.a0 = 2.0;
  s.x_min = 0.0;
  s.x_max = 1.0;
  s.sample_count = 3;
  const auto c = fourier_segment(s);
  ASSERT_EQ(c.size(), 3u);
  for (const auto& p : c.points()) EXPECT_DOUBLE_EQ(p.y(), 1.0);
  EXPECT_DOUBLE_EQ(c[1].x(), 0.5);
}

TEST(FourierSegment, CosineHarmonicAtZero) {
  FourierSegment s;
  s.harmonics = {{1.0, 0.0}};
  EXPECT_DOUBLE_EQ(s.evaluate(0.0), 1.0);
}

TEST(FourierSegment, MatchesScalarEvaluation) {
  FourierSegment s;
  s.a0 = 0.4;
  s.harmonics = {{0.3, -0.2}};
  s.omega = 2.0;
  EXPECT_NEAR(s.evaluate(0.5), 0.193796494798863, 1e-12);
}

TEST(FourierSegment, RejectsBadParameters) {
  FourierSegment s;
  s.sample_count = 1;
  EXPECT_THROW(fourier_segment(s), ParameterError);
  s.sample_count = 4;
  s.x_min = 1.0;
  s.x_max = 1.0;
  EXPECT_THROW(fourier_segment(s), ParameterError);
}

TEST(FourierSegment, XStrictlyIncreasing) {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    FourierSegment s;
    s.a0 = rng.uniform(-3, 3);
    for (int n = rng.uniform_int(0, 4); n > 0; --n) s.harmonics.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    s.omega = rng.uniform(0.1, 3.0);
    s.x_min = rng.uniform(-5, 5);
    s.x_max = s.x_min + rng.uniform(0.1, 10);
    s.sample_count = rng.uniform_int(2, 50);
    const auto c = fourier_segment(s);
    ASSERT_EQ(c.size(), static_cast<std::size_t>(s.sample_count));
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GT(c[i].x(), c[i - 1].x());
  }
}

TEST(Concatenate, SingleSegmentIsIdentity) {
  const PolylineCurve a({{0, 0}, {1, 0.5}, {2, 0}});
  const std::vector<PolylineCurve> segs{a};
  EXPECT_EQ(concatenate_segments(segs), a);
}

TEST(Concatenate, TwoHorizontalUnitSegments) {
  const PolylineCurve a({{0, 0}, {1, 0}});
  const std::vector<PolylineCurve> segs{a, a};
  const auto c = concatenate_segments(segs);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR((c.back() - Vec2(2, 0)).norm(), 0.0, 1e-12);
}

TEST(Concatenate, EmptyListThrows) {
  EXPECT_THROW(concatenate_segments(std::span<const PolylineCurve>{}), ParameterError);
}

TEST(Concatenate, PointCountAndTangentContinuity) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    std::vector<PolylineCurve> segs;
    std::size_t total = 0;
    for (int i = 0; i < 3; ++i) {
      segs.push_back(test::random_walk(rng, static_cast<std::size_t>(rng.uniform_int(2, 12))));
      total += segs.back().size();
    }
    const auto c = concatenate_segments(segs);
    ASSERT_EQ(c.size(), total - 2);
    // Each piece keeps its shape: segment lengths survive the rigid placement.
    double expect_len = 0.0;
    for (const auto& s : segs) expect_len += s.length();
    EXPECT_NEAR(c.length(), expect_len, 1e-9 * expect_len);
    // At a junction the incoming and outgoing directions agree.
    std::size_t j = segs[0].size() - 1;
    const Vec2 in = (c[j] - c[j - 1]).normalized();
    const Vec2 out = (c[j + 1] - c[j]).normalized();
    EXPECT_NEAR(in.dot(out), 1.0, 1e-9);
  }
}

TEST(Curvature, CollinearAndRightAngle) {
  const PolylineCurve line({{0, 0}, {1, 0}, {2, 0}});
  EXPECT_DOUBLE_EQ(curvature_angle(line, 1), 0.0);
  const PolylineCurve corner({{0, 0}, {1, 0}, {1, 1}});
  EXPECT_NEAR(curvature_angle(corner, 1), kPi / 2, 1e-12);
}

TEST(Curvature, MatchesDotProductOracle) {
  const PolylineCurve c({{0, 0}, {1, 0}, {2, 0.5}});
  EXPECT_NEAR(curvature_angle(c, 1), 0.463647609000806, 1e-12);
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const auto w = test::random_walk(rng, 8, 1.0, 3.0);
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
      const double a = curvature_angle(w, i);
      EXPECT_NEAR(a, test::unsigned_angle_oracle(w[i] - w[i - 1], w[i + 1] - w[i]), 1e-9);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, kPi);
    }
  }
}

TEST(Curvature, EndpointThrows) {
  const PolylineCurve c({{0, 0}, {1, 0}, {2, 0}});
  EXPECT_THROW(curvature_angle(c, 0), ParameterError);
  EXPECT_THROW(curvature_angle(c, 2), ParameterError);
}

TEST(SampleKeypoints, StraightLineUniform) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= 150; ++i) pts.emplace_back(i * 0.1, 0.0);
  const auto k = sample_keypoints(PolylineCurve(pts), 16, kPi / 4);
  ASSERT_EQ(k.size(), 16u);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(k[j].x(), j * 1.0, 1e-9);
}

TEST(SampleKeypoints, CornerIsSelected) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= 37; ++i) pts.emplace_back(i * 0.1, 0.0);
  for (int i = 1; i <= 40; ++i) pts.emplace_back(3.7, i * 0.1);
  const PolylineCurve c(pts);
  int above = 0;
  std::size_t corner = 0;
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    if (curvature_angle(c, i) > kPi / 4) {
      ++above;
      corner = i;
    }
  }
  ASSERT_EQ(above, 1);
  const auto idx = sample_keypoint_indices(c, 16, kPi / 4);
  EXPECT_NE(std::find(idx.begin(), idx.end(), corner), idx.end());
}

TEST(SampleKeypoints, CountOrderAndEnds) {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const int m = rng.uniform_int(2, 20);
    const auto c = test::random_walk(rng, static_cast<std::size_t>(rng.uniform_int(m, 80)), 1.0, 1.5);
    const auto idx = sample_keypoint_indices(c, m, kPi / 4);
    ASSERT_EQ(idx.size(), static_cast<std::size_t>(m));
    EXPECT_EQ(idx.front(), 0u);
    EXPECT_EQ(idx.back(), c.size() - 1);
    for (std::size_t j = 1; j < idx.size(); ++j) EXPECT_GT(idx[j], idx[j - 1]);
  }
}

TEST(SampleKeypoints, TooFewPointsThrows) {
  const PolylineCurve c({{0, 0}, {1, 0}, {2, 0}});
  EXPECT_THROW(sample_keypoints(c, 4, kPi / 4), ParameterError);
  EXPECT_THROW(sample_keypoints(c, 1, kPi / 4), ParameterError);
}

TEST(Transform, IdentityAndTranslation) {
  Rng rng(9);
  const auto c = test::random_walk(rng, 20);
  EXPECT_EQ(transform_curve(c, Vec2::Zero(), 0.0), c);
  const auto t = transform_curve(c, Vec2(3, -2), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR((t[i] - c[i] - Vec2(3, -2)).norm(), 0.0, 1e-12);
}

TEST(Transform, HalfTurnTwiceIsIdentity) {
  Rng rng(10);
  const auto c = test::random_walk(rng, 20);
  const auto t = transform_curve(transform_curve(c, Vec2::Zero(), kPi), Vec2::Zero(), kPi);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR((t[i] - c[i]).norm(), 0.0, 1e-9);
}

TEST(Transform, PreservesPairwiseDistances) {
  Rng rng(12);
  for (int k = 0; k < 50; ++k) {
    const auto c = test::random_walk(rng, 15);
    const auto t = transform_curve(c, Vec2(rng.uniform(-5, 5), rng.uniform(-5, 5)), rng.uniform(-kPi, kPi));
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        const double d0 = (c[i] - c[j]).norm();
        EXPECT_NEAR((t[i] - t[j]).norm(), d0, 1e-9 * std::max(1.0, d0));
      }
    }
  }
}

TEST(Polyline, InvariantsEnforced) {
  EXPECT_THROW(PolylineCurve({{0, 0}}), ParameterError);
  EXPECT_THROW(PolylineCurve({{0, 0}, {0, 0}}), ParameterError);
}

TEST(Polyline, ResampleAndDensify) {
  Rng rng(13);
  const auto c = test::random_walk(rng, 30);
  const auto r = c.resample_count(50);
  ASSERT_EQ(r.size(), 50u);
  EXPECT_NEAR((r.front() - c.front()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((r.back() - c.back()).norm(), 0.0, 1e-9);
  const auto d = c.densified(0.1);
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LE((d[i] - d[i - 1]).norm(), 0.1 + 1e-12);
  EXPECT_NEAR(d.length(), c.length(), 1e-9);
}

TEST(SegmentDistance, AgreesWithDenseSampling) {
  Rng rng(14);
  for (int t = 0; t < 500; ++t) {
    const auto p = test::random_points(rng, 3);
    double best = 1e9;
    for (int i = 0; i <= 2000; ++i) best = std::min(best, (p[0] - (p[1] + (p[2] - p[1]) * (i / 2000.0))).norm());
    EXPECT_NEAR(point_segment_distance(p[0], p[1], p[2]), best, 2e-3);
  }
}

}  // namespace
}  // namespace dlo
