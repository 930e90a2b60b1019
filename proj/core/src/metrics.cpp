#include "dlo/metrics.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>

#include "dlo/error.hpp"

namespace dlo {

namespace {
void require_same_dims(const BinaryImage& a, const BinaryImage& b) {
  if (a.dims() != b.dims()) throw ParameterError("image dimensions differ");
}
}  // namespace

double iou(const BinaryImage& a, const BinaryImage& b) {
  require_same_dims(a, b);
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    inter += static_cast<std::size_t>(da[i] & db[i]);
    uni += static_cast<std::size_t>(da[i] | db[i]);
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double l1_pixel(const BinaryImage& a, const BinaryImage& b) {
  require_same_dims(a, b);
  std::size_t diff = 0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) diff += static_cast<std::size_t>(da[i] ^ db[i]);
  return static_cast<double>(diff) / static_cast<double>(da.size());
}

double chamfer(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) throw ParameterError("chamfer distance needs non-empty point sets");
  auto one_way = [](std::span<const Vec2> from, std::span<const Vec2> to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
      sum += best;
    }
    return sum;
  };
  return one_way(a, b) + one_way(b, a);
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

MetricReport MetricReport::from(std::string name, const RunningStats& stats) {
  MetricReport r;
  r.name = std::move(name);
  r.value = stats.mean();
  r.sample_count = stats.count();
  r.mean = stats.mean();
  r.variance = std::max(0.0, stats.variance());
  return r;
}

std::string format_reports(std::span<const MetricReport> reports) {
  std::size_t width = 6;
  for (const auto& r : reports) width = std::max(width, r.name.size());
  std::string out = fmt::format("{:<{}}  {:>12}  {:>8}  {:>12}  {:>12}\n", "metric", width,
                                "value", "n", "mean", "variance");
  for (const auto& r : reports) {
    out += fmt::format("{:<{}}  {:>12.4f}  {:>8}  {:>12.4f}  {:>12.4f}", r.name, width, r.value,
                       r.sample_count, r.mean, r.variance);
    if (!r.note.empty()) out += "  " + r.note;
    out += '\n';
  }
  return out;
}

std::string format_reports_jsonl(std::span<const MetricReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    nlohmann::json j = {{"name", r.name},         {"value", r.value},
                        {"n", r.sample_count},    {"mean", r.mean},
                        {"variance", r.variance}, {"note", r.note}};
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace dlo
