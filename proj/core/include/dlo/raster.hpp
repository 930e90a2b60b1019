#pragma once

#include <cstdint>
#include <vector>

#include "dlo/geometry.hpp"

namespace dlo {

struct ImageDims {
  int width = 128;
  int height = 64;
  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Axis-aligned world rectangle observed by the camera.
struct Roi {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 1.0;
  double y_max = 1.0;
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  friend bool operator==(const Roi&, const Roi&) = default;
};

/// Pixel (u, v) covers [u, u+1) x [v, v+1) in continuous image coordinates.
struct Pixel {
  int u = 0;
  int v = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel& a, const Pixel& b) {
    if (a.v != b.v) return a.v <=> b.v;
    return a.u <=> b.u;
  }
};

/// W x H binary grid, row-major. Stored one byte per pixel in memory; packed on disk.
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height);
  explicit BinaryImage(ImageDims dims) : BinaryImage(dims.width, dims.height) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  ImageDims dims() const noexcept { return {width_, height_}; }

  bool in_bounds(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }
  /// Out-of-bounds reads return false.
  bool get(int u, int v) const noexcept {
    return in_bounds(u, v) && bits_[static_cast<std::size_t>(v) * width_ + u] != 0;
  }
  void set(int u, int v, bool value = true);
  /// Pixel containing a continuous image-frame point.
  bool at(const Vec2& p) const;

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<Pixel> positive_pixels() const;

  const std::vector<std::uint8_t>& data() const noexcept { return bits_; }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Affine world <-> image mapping. World y points up, image v points down.
class WorldImageMap {
 public:
  WorldImageMap(const Roi& roi, ImageDims dims);

  Vec2 to_image(const Vec2& world) const;
  Vec2 to_world(const Vec2& image) const;
  /// Pixels per world unit along x and y.
  double scale_x() const { return sx_; }
  double scale_y() const { return sy_; }
  const Roi& roi() const { return roi_; }
  ImageDims dims() const { return dims_; }

  KeypointSequence to_image(const KeypointSequence& kps) const;
  KeypointSequence to_world(const KeypointSequence& kps) const;

 private:
  Roi roi_;
  ImageDims dims_;
  double sx_;
  double sy_;
};

/// Thickened curve raster: a pixel is set when any point of a disk of radius
/// half_thickness (world units) around the densified curve falls in its cell.
BinaryImage rasterize(const PolylineCurve& curve, double half_thickness, ImageDims dims,
                      const Roi& roi);

/// Same, for a polyline already in image coordinates with thickness in pixels.
BinaryImage rasterize_image_frame(const PolylineCurve& curve, double half_thickness_px,
                                  ImageDims dims);

}  // namespace dlo
