#include <gtest/gtest.h>

#include <limits>

#include "dlo/error.hpp"
#include "dlo/metrics.hpp"
#include "helpers.hpp"

namespace dlo {
namespace {

double iou_oracle(const BinaryImage& a, const BinaryImage& b) {
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (int v = 0; v < a.height(); ++v) {
    for (int u = 0; u < a.width(); ++u) {
      inter += (a.get(u, v) && b.get(u, v)) ? 1 : 0;
      uni += (a.get(u, v) || b.get(u, v)) ? 1 : 0;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double chamfer_oracle(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  auto one_way = [](const std::vector<Vec2>& x, const std::vector<Vec2>& y) {
    double s = 0.0;
    for (const auto& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : y) best = std::min(best, (p - q).squaredNorm());
      s += best;
    }
    return s;
  };
  return one_way(a, b) + one_way(b, a);
}

TEST(Iou, Trivial) {
  const auto a = test::band(8, 8, 2, 4);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, test::band(8, 8, 6, 7)), 0.0);
  EXPECT_DOUBLE_EQ(iou(BinaryImage(8, 8), BinaryImage(8, 8)), 0.0);
  EXPECT_THROW(iou(a, BinaryImage(8, 9)), ParameterError);
}

TEST(Iou, HalfOverlappingBands) {
  // Rows 0-3 and rows 2-5: intersection 2 rows, union 6 rows.
  EXPECT_DOUBLE_EQ(iou(test::band(10, 8, 0, 3), test::band(10, 8, 2, 5)), 2.0 / 6.0);
}

TEST(L1, TrivialAndComplement) {
  const auto a = test::band(8, 8, 2, 4);
  EXPECT_DOUBLE_EQ(l1_pixel(a, a), 0.0);
  BinaryImage c(8, 8);
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) c.set(u, v, !a.get(u, v));
  }
  EXPECT_DOUBLE_EQ(l1_pixel(a, c), 1.0);
  EXPECT_THROW(l1_pixel(a, BinaryImage(9, 8)), ParameterError);
}

TEST(Chamfer, Trivial) {
  const std::vector<Vec2> a{{0, 0}, {1, 2}};
  EXPECT_DOUBLE_EQ(chamfer(a, a), 0.0);
  const std::vector<Vec2> p{{0, 0}};
  const std::vector<Vec2> q{{3, 4}};
  EXPECT_DOUBLE_EQ(chamfer(p, q), 50.0);
  EXPECT_THROW(chamfer(a, std::vector<Vec2>{}), ParameterError);
}

TEST(Metrics, AgreeWithBruteForceOnRandomInstances) {
  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    const int w = rng.uniform_int(1, 12);
    const int h = rng.uniform_int(1, 12);
    const auto a = test::random_image(rng, w, h, rng.uniform());
    const auto b = test::random_image(rng, w, h, rng.uniform());
    EXPECT_EQ(iou(a, b), iou_oracle(a, b));
    EXPECT_EQ(iou(a, b), iou(b, a));
    const double l1 = l1_pixel(a, b);
    EXPECT_EQ(l1, l1_pixel(b, a));
    EXPECT_GE(l1, 0.0);
    EXPECT_LE(l1, 1.0);
    const auto pa = test::random_points(rng, static_cast<std::size_t>(rng.uniform_int(1, 20)));
    const auto pb = test::random_points(rng, static_cast<std::size_t>(rng.uniform_int(1, 20)));
    EXPECT_NEAR(chamfer(pa, pb), chamfer_oracle(pa, pb), 1e-12);
    EXPECT_NEAR(chamfer(pa, pb), chamfer(pb, pa), 1e-12);
  }
}

TEST(RunningStats, MatchesTwoPass) {
  Rng rng(4);
  std::vector<double> xs;
  RunningStats s;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(rng.uniform(-10, 30));
    s.add(xs.back());
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= xs.size();
  EXPECT_NEAR(s.mean(), mean, 1e-9);
  EXPECT_NEAR(s.variance(), var, 1e-7);
  const auto r = MetricReport::from("x", s);
  EXPECT_GE(r.variance, 0.0);
  EXPECT_EQ(r.sample_count, 1000u);
}

TEST(Reports, TextAndJsonl) {
  RunningStats s;
  s.add(1.0);
  s.add(3.0);
  const std::vector<MetricReport> r{MetricReport::from("iou", s)};
  const auto text = format_reports(r);
  EXPECT_NE(text.find("iou"), std::string::npos);
  EXPECT_NE(text.find("2.0000"), std::string::npos);
  EXPECT_EQ(format_reports_jsonl(r),
            "{\"mean\":2.0,\"n\":2,\"name\":\"iou\",\"note\":\"\",\"value\":2.0,\"variance\":1.0}\n");
}

}  // namespace
}  // namespace dlo
