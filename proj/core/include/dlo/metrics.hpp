#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dlo/geometry.hpp"
#include "dlo/raster.hpp"

namespace dlo {

/// Intersection over union. Two empty images score 0.
double iou(const BinaryImage& a, const BinaryImage& b);

/// Mean absolute per-pixel difference, in [0, 1].
double l1_pixel(const BinaryImage& a, const BinaryImage& b);

/// Sum of squared nearest-neighbour distances in both directions.
double chamfer(std::span<const Vec2> a, std::span<const Vec2> b);

/// Running mean and population variance (Welford).
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ == 0 ? 0.0 : m2_ / static_cast<double>(n_); }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MetricReport {
  std::string name;
  double value = 0.0;
  std::size_t sample_count = 0;
  double mean = 0.0;
  double variance = 0.0;
  /// Free-form flag, e.g. "empty-union" for the degenerate IoU case.
  std::string note;

  static MetricReport from(std::string name, const RunningStats& stats);
};

/// Aligned text table, one report per row.
std::string format_reports(std::span<const MetricReport> reports);
/// One JSON object per line.
std::string format_reports_jsonl(std::span<const MetricReport> reports);

}  // namespace dlo
