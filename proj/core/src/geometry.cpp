#include "dlo/geometry.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dlo/error.hpp"

namespace dlo {

double angle_between(const Vec2& a, const Vec2& b) {
  return std::atan2(std::abs(cross(a, b)), a.dot(b));
}

double FourierSegment::evaluate(double x) const {
  double y = a0 / 2.0;
  for (std::size_t n = 0; n < harmonics.size(); ++n) {
    const double k = static_cast<double>(n + 1) * omega * x;
    y += harmonics[n].a * std::cos(k) + harmonics[n].b * std::sin(k);
  }
  return y;
}

PolylineCurve::PolylineCurve(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ParameterError("polyline needs at least two points");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i] == points_[i - 1]) {
      throw ParameterError("polyline has coincident consecutive points at index " +
                           std::to_string(i));
    }
  }
}

double PolylineCurve::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) total += (points_[i] - points_[i - 1]).norm();
  return total;
}

std::vector<double> PolylineCurve::cumulative_length() const {
  std::vector<double> s(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    s[i] = s[i - 1] + (points_[i] - points_[i - 1]).norm();
  }
  return s;
}

Vec2 PolylineCurve::centroid() const {
  Vec2 c = Vec2::Zero();
  for (const auto& p : points_) c += p;
  return c / static_cast<double>(points_.size());
}

Vec2 PolylineCurve::point_at(double s) const {
  if (s <= 0.0) return points_.front();
  double acc = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double seg = (points_[i] - points_[i - 1]).norm();
    if (acc + seg >= s) {
      const double t = (s - acc) / seg;
      return points_[i - 1] + t * (points_[i] - points_[i - 1]);
    }
    acc += seg;
  }
  return points_.back();
}

PolylineCurve PolylineCurve::reversed() const {
  std::vector<Vec2> r(points_.rbegin(), points_.rend());
  return PolylineCurve(std::move(r));
}

PolylineCurve PolylineCurve::resample_count(std::size_t n) const {
  if (n < 2) throw ParameterError("resample needs at least two points");
  const auto s = cumulative_length();
  const double total = s.back();
  std::vector<Vec2> out;
  out.reserve(n);
  std::size_t seg = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 1 < points_.size() && s[seg] < target) ++seg;
    const double len = s[seg] - s[seg - 1];
    const double t = len > 0.0 ? std::clamp((target - s[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.push_back(points_[seg - 1] + t * (points_[seg] - points_[seg - 1]));
  }
  out.front() = points_.front();
  out.back() = points_.back();
  return PolylineCurve(std::move(out));
}

PolylineCurve PolylineCurve::densified(double max_step) const {
  if (!(max_step > 0.0)) throw ParameterError("densify step must be positive");
  std::vector<Vec2> out;
  out.push_back(points_.front());
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const Vec2 a = points_[i - 1];
    const Vec2 b = points_[i];
    const double len = (b - a).norm();
    const auto pieces = static_cast<std::size_t>(std::floor(len / max_step)) + 1;
    for (std::size_t k = 1; k < pieces; ++k) {
      out.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(pieces)));
    }
    out.push_back(b);
  }
  return PolylineCurve(std::move(out));
}

KeypointSequence KeypointSequence::reversed() const {
  return {std::vector<Vec2>(points.rbegin(), points.rend()), frame};
}

PolylineCurve fourier_segment(const FourierSegment& seg) {
  if (seg.sample_count < 2) throw ParameterError("fourier segment needs sample_count >= 2");
  if (!(seg.x_min < seg.x_max)) throw ParameterError("fourier segment needs x_min < x_max");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(seg.sample_count));
  const double step = (seg.x_max - seg.x_min) / static_cast<double>(seg.sample_count - 1);
  for (int i = 0; i < seg.sample_count; ++i) {
    const double x = i + 1 == seg.sample_count ? seg.x_max : seg.x_min + step * i;
    pts.emplace_back(x, seg.evaluate(x));
  }
  return PolylineCurve(std::move(pts));
}

PolylineCurve concatenate_segments(std::span<const PolylineCurve> segments) {
  if (segments.empty()) throw ParameterError("cannot concatenate an empty segment list");
  std::vector<Vec2> out = segments.front().points();
  for (std::size_t k = 1; k < segments.size(); ++k) {
    const auto& seg = segments[k].points();
    const Vec2 outgoing = out[out.size() - 1] - out[out.size() - 2];
    const Vec2 incoming = seg[1] - seg[0];
    const double theta = std::atan2(outgoing.y(), outgoing.x()) -
                         std::atan2(incoming.y(), incoming.x());
    const Eigen::Rotation2Dd rot(theta);
    const Vec2 anchor = out.back();
    for (std::size_t i = 1; i < seg.size(); ++i) {
      out.push_back(anchor + rot * (seg[i] - seg[0]));
    }
  }
  return PolylineCurve(std::move(out));
}

double curvature_angle(const PolylineCurve& curve, std::size_t i) {
  if (i == 0 || i + 1 >= curve.size()) {
    throw ParameterError("curvature is defined only at interior points");
  }
  return angle_between(curve[i] - curve[i - 1], curve[i + 1] - curve[i]);
}

std::vector<std::size_t> sample_keypoint_indices(const PolylineCurve& curve, int m,
                                                 double tau_u) {
  if (m < 2) throw ParameterError("need at least two keypoints");
  const std::size_t n = curve.size();
  const auto count = static_cast<std::size_t>(m);
  if (count > n) throw ParameterError("more keypoints requested than curve points");

  const auto s = curve.cumulative_length();
  const double total = s.back();

  // Uniform candidates: the curve point nearest in arc length to k * total / (m - 1).
  std::vector<std::size_t> idx(count);
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(count - 1);
    while (cursor + 1 < n && std::abs(s[cursor + 1] - target) <= std::abs(s[cursor] - target)) {
      ++cursor;
    }
    idx[k] = cursor;
  }
  idx.front() = 0;
  // Enforce strict monotonicity while leaving room for the remaining candidates.
  for (std::size_t k = 1; k < count; ++k) idx[k] = std::max(idx[k], idx[k - 1] + 1);
  idx.back() = n - 1;
  for (std::size_t k = count - 1; k-- > 0;) idx[k] = std::min(idx[k], idx[k + 1] - 1);

  struct Corner {
    std::size_t index;
    double alpha;
  };
  std::vector<Corner> corners;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = curvature_angle(curve, i);
    if (a > tau_u) corners.push_back({i, a});
  }
  std::stable_sort(corners.begin(), corners.end(),
                   [](const Corner& a, const Corner& b) { return a.alpha > b.alpha; });

  const std::vector<std::size_t> uniform = idx;
  std::vector<bool> replaced(count, false);
  for (const auto& c : corners) {
    // Nearest uniform candidate in arc length; ties go to the earlier candidate.
    std::size_t best = 0;
    double best_d = std::abs(s[uniform[0]] - s[c.index]);
    for (std::size_t k = 1; k < count; ++k) {
      const double d = std::abs(s[uniform[k]] - s[c.index]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best == 0 || best == count - 1 || replaced[best]) continue;
    if (c.index <= idx[best - 1] || c.index >= idx[best + 1]) continue;
    idx[best] = c.index;
    replaced[best] = true;
  }
  return idx;
}

KeypointSequence sample_keypoints(const PolylineCurve& curve, int m, double tau_u,
                                  Frame frame) {
  KeypointSequence out{{}, frame};
  for (std::size_t i : sample_keypoint_indices(curve, m, tau_u)) out.points.push_back(curve[i]);
  return out;
}

PolylineCurve transform_curve(const PolylineCurve& curve, const Vec2& translation,
                              double rotation) {
  std::vector<Vec2> out;
  out.reserve(curve.size());
  if (rotation == 0.0) {
    // Exact for pure translations (no round trip through the centroid).
    for (const auto& p : curve.points()) out.push_back(p + translation);
    return PolylineCurve(std::move(out));
  }
  const Vec2 c = curve.centroid();
  const Eigen::Rotation2Dd rot(rotation);
  for (const auto& p : curve.points()) out.push_back(c + rot * (p - c) + translation);
  return PolylineCurve(std::move(out));
}

PolylineCurve keypoints_polyline(const KeypointSequence& kps) {
  std::vector<Vec2> pts;
  for (const auto& p : kps.points) {
    if (pts.empty() || pts.back() != p) pts.push_back(p);
  }
  if (pts.size() == 1) pts.push_back(pts.front() + Vec2(1e-9, 0.0));
  return PolylineCurve(std::move(pts));
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool segment_hits_disk(const Vec2& a, const Vec2& b, const Vec2& center, double radius) {
  return point_segment_distance(center, a, b) < radius;
}

}  // namespace dlo
