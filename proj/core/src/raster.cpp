#include "dlo/raster.hpp"

#include <algorithm>
#include <cmath>

#include "dlo/error.hpp"

namespace dlo {

BinaryImage::BinaryImage(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ParameterError("image dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

void BinaryImage::set(int u, int v, bool value) {
  if (!in_bounds(u, v)) throw ParameterError("pixel out of bounds");
  bits_[static_cast<std::size_t>(v) * width_ + u] = value ? 1 : 0;
}

bool BinaryImage::at(const Vec2& p) const {
  if (!std::isfinite(p.x()) || !std::isfinite(p.y())) return false;
  return get(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
}

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Pixel> BinaryImage::positive_pixels() const {
  std::vector<Pixel> out;
  for (int v = 0; v < height_; ++v) {
    for (int u = 0; u < width_; ++u) {
      if (bits_[static_cast<std::size_t>(v) * width_ + u]) out.push_back({u, v});
    }
  }
  return out;
}

WorldImageMap::WorldImageMap(const Roi& roi, ImageDims dims) : roi_(roi), dims_(dims) {
  if (!(roi.width() > 0.0) || !(roi.height() > 0.0)) {
    throw ParameterError("region of interest must have positive area");
  }
  if (dims.width <= 0 || dims.height <= 0) throw ParameterError("image dimensions must be positive");
  sx_ = dims.width / roi.width();
  sy_ = dims.height / roi.height();
}

Vec2 WorldImageMap::to_image(const Vec2& w) const {
  return {(w.x() - roi_.x_min) * sx_, (roi_.y_max - w.y()) * sy_};
}

Vec2 WorldImageMap::to_world(const Vec2& p) const {
  return {roi_.x_min + p.x() / sx_, roi_.y_max - p.y() / sy_};
}

KeypointSequence WorldImageMap::to_image(const KeypointSequence& kps) const {
  if (kps.frame == Frame::image) return kps;
  KeypointSequence out{{}, Frame::image};
  for (const auto& p : kps.points) out.points.push_back(to_image(p));
  return out;
}

KeypointSequence WorldImageMap::to_world(const KeypointSequence& kps) const {
  if (kps.frame == Frame::world) return kps;
  KeypointSequence out{{}, Frame::world};
  for (const auto& p : kps.points) out.points.push_back(to_world(p));
  return out;
}

namespace {

// Stamps the thickened image-frame polyline. The thickness disk is measured in
// world units, so it is an ellipse in pixels when the two scales differ.
BinaryImage stamp(const PolylineCurve& image_curve, double half_thickness, double sx, double sy,
                  ImageDims dims) {
  if (!(half_thickness >= 0.0)) throw ParameterError("half thickness must be non-negative");
  BinaryImage img(dims);
  const PolylineCurve dense = image_curve.densified(0.49);
  const double rx = half_thickness * sx;
  const double ry = half_thickness * sy;
  for (const auto& p : dense.points()) {
    const int u0 = std::max(0, static_cast<int>(std::floor(p.x() - rx)));
    const int u1 = std::min(dims.width - 1, static_cast<int>(std::floor(p.x() + rx)));
    const int v0 = std::max(0, static_cast<int>(std::floor(p.y() - ry)));
    const int v1 = std::min(dims.height - 1, static_cast<int>(std::floor(p.y() + ry)));
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        const bool inside = p.x() >= u && p.x() < u + 1 && p.y() >= v && p.y() < v + 1;
        bool hit = inside;
        if (!hit && half_thickness > 0.0) {
          const double dx = (p.x() - std::clamp(p.x(), double(u), double(u + 1))) / sx;
          const double dy = (p.y() - std::clamp(p.y(), double(v), double(v + 1))) / sy;
          hit = dx * dx + dy * dy < half_thickness * half_thickness;
        }
        if (hit) img.set(u, v);
      }
    }
  }
  return img;
}

}  // namespace

BinaryImage rasterize(const PolylineCurve& curve, double half_thickness, ImageDims dims,
                      const Roi& roi) {
  const WorldImageMap map(roi, dims);
  std::vector<Vec2> pts;
  pts.reserve(curve.size());
  for (const auto& p : curve.points()) pts.push_back(map.to_image(p));
  return stamp(PolylineCurve(std::move(pts)), half_thickness, map.scale_x(), map.scale_y(), dims);
}

BinaryImage rasterize_image_frame(const PolylineCurve& curve, double half_thickness_px,
                                  ImageDims dims) {
  return stamp(curve, half_thickness_px, 1.0, 1.0, dims);
}

}  // namespace dlo
