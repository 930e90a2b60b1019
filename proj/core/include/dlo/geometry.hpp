#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace dlo {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

/// Signed z-component of the 2D cross product.
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Counter-clockwise perpendicular.
inline Vec2 perp(const Vec2& a) { return {-a.y(), a.x()}; }

/// Unsigned angle between two vectors in [0, pi]. Zero-length input yields 0.
double angle_between(const Vec2& a, const Vec2& b);

struct Harmonic {
  double a = 0.0;
  double b = 0.0;
};

/// One curve piece y = a0/2 + sum_n a_n cos(n w x) + b_n sin(n w x), sampled along x.
struct FourierSegment {
  double a0 = 0.0;
  std::vector<Harmonic> harmonics;
  double omega = 1.0;
  double x_min = 0.0;
  double x_max = 1.0;
  int sample_count = 2;

  double evaluate(double x) const;
};

/// Ordered 2D point chain. At least two points, consecutive points distinct.
class PolylineCurve {
 public:
  PolylineCurve() = default;
  /// Throws ParameterError when the invariants do not hold.
  explicit PolylineCurve(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const Vec2& operator[](std::size_t i) const { return points_[i]; }
  const Vec2& front() const { return points_.front(); }
  const Vec2& back() const { return points_.back(); }

  double length() const;
  /// Arc length at every point, starting from 0.
  std::vector<double> cumulative_length() const;
  Vec2 centroid() const;
  /// Point at arc length s (clamped to [0, length]).
  Vec2 point_at(double s) const;

  PolylineCurve reversed() const;
  /// n points equally spaced in arc length, endpoints included.
  PolylineCurve resample_count(std::size_t n) const;
  /// Inserts points so no two consecutive points are farther apart than max_step.
  PolylineCurve densified(double max_step) const;

  friend bool operator==(const PolylineCurve&, const PolylineCurve&) = default;

 private:
  std::vector<Vec2> points_;
};

enum class Frame { image, world };

/// m ordered landmark points; index 0 is the end nearer the left arm.
struct KeypointSequence {
  std::vector<Vec2> points;
  Frame frame = Frame::image;

  std::size_t size() const noexcept { return points.size(); }
  const Vec2& operator[](std::size_t i) const { return points[i]; }
  KeypointSequence reversed() const;
};

PolylineCurve fourier_segment(const FourierSegment& seg);

/// Joins segments end to end. Each following segment is rotated so its initial
/// tangent continues the previous one, then translated onto the previous end point.
PolylineCurve concatenate_segments(std::span<const PolylineCurve> segments);

/// Turning angle at interior point i, in [0, pi].
double curvature_angle(const PolylineCurve& curve, std::size_t i);

/// Curve indices chosen as keypoints (strictly increasing, first = 0, last = n-1).
std::vector<std::size_t> sample_keypoint_indices(const PolylineCurve& curve, int m,
                                                 double tau_u);

/// Uniform arc-length candidates with high-curvature substitution.
KeypointSequence sample_keypoints(const PolylineCurve& curve, int m, double tau_u,
                                  Frame frame = Frame::world);

/// Rotates by `rotation` about the centroid, then translates.
PolylineCurve transform_curve(const PolylineCurve& curve, const Vec2& translation,
                              double rotation);

/// Polyline through the keypoints (consecutive duplicates dropped).
PolylineCurve keypoints_polyline(const KeypointSequence& kps);

/// Shortest distance from p to segment [a, b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// True when segment [a, b] passes strictly closer than radius to center.
bool segment_hits_disk(const Vec2& a, const Vec2& b, const Vec2& center, double radius);

}  // namespace dlo
