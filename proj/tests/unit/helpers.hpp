#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dlo/geometry.hpp"
#include "dlo/raster.hpp"
#include "dlo/rng.hpp"

namespace dlo::test {

/// Fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("dloshape_test_" + tag);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<Vec2> random_points(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(rng.uniform(lo, hi), rng.uniform(lo, hi));
  return out;
}

/// Random walk with bounded turning, consecutive points distinct.
inline PolylineCurve random_walk(Rng& rng, std::size_t n, double step = 1.0, double turn = 0.6) {
  std::vector<Vec2> pts{Vec2::Zero()};
  double heading = rng.uniform(-kPi, kPi);
  for (std::size_t i = 1; i < n; ++i) {
    heading += rng.uniform(-turn, turn);
    pts.push_back(pts.back() + step * rng.uniform(0.5, 1.5) * Vec2(std::cos(heading), std::sin(heading)));
  }
  return PolylineCurve(std::move(pts));
}

inline BinaryImage random_image(Rng& rng, int w, int h, double density) {
  BinaryImage img(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) img.set(u, v, rng.uniform() < density);
  }
  return img;
}

/// Horizontal band of rows [v0, v1] across the full width.
inline BinaryImage band(int w, int h, int v0, int v1, int u0 = 0, int u1 = -1) {
  BinaryImage img(w, h);
  if (u1 < 0) u1 = w - 1;
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) img.set(u, v);
  }
  return img;
}

inline double unsigned_angle_oracle(const Vec2& a, const Vec2& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::max(-1.0, std::min(1.0, c)));
}

}  // namespace dlo::test
