#pragma once

#include <vector>

#include "dlo/geometry.hpp"
#include "dlo/raster.hpp"

namespace dlo {

/// One-pixel-wide centre line of a binary shape.
struct Skeleton {
  ImageDims dims;
  /// Sorted by (v, u).
  std::vector<Pixel> pixels;
  /// Pixels with exactly one 8-neighbour in the skeleton, sorted by (u, v).
  std::vector<Pixel> endpoints;

  BinaryImage to_image() const;
};

/// Zhang-Suen thinning to a fixpoint followed by removal of staircase pixels that do
/// not carry connectivity. Throws EmptyInputError for an all-zero image.
Skeleton skeletonize(const BinaryImage& image);

/// Removes branches shorter than `min_length` pixels that hang off a junction.
Skeleton prune_spurs(const Skeleton& skeleton, int min_length = 3);

/// Skeleton pixels in traversal order starting at the left end.
std::vector<Pixel> order_skeleton(const Skeleton& skeleton);

/// Geometric baseline: thin, order by nearest-neighbour walk from the left end,
/// sample m points evenly by walk length. Keypoints are pixel centres.
/// Throws AmbiguityError when the pruned skeleton has no end or more than two ends.
KeypointSequence detect_keypoints_geometric(const BinaryImage& image, int m);

/// Interface for pluggable detectors, finetuned identically downstream.
class KeypointDetector {
 public:
  virtual ~KeypointDetector() = default;
  virtual KeypointSequence detect(const BinaryImage& image, int m) const = 0;
};

class GeometricDetector final : public KeypointDetector {
 public:
  KeypointSequence detect(const BinaryImage& image, int m) const override {
    return detect_keypoints_geometric(image, m);
  }
};

/// 3x3 closing (dilate then erode).
BinaryImage morphological_close(const BinaryImage& image);

/// Geometric detection, retried once on a closed image when the skeleton is ambiguous.
KeypointSequence detect_with_cleanup(const BinaryImage& image, int m);

/// Moves every off-body keypoint onto the shape: ends snap to the nearest positive
/// pixel, interior points search perpendicular to the neighbour chord.
KeypointSequence finetune_keypoints(const KeypointSequence& raw, const BinaryImage& image);

/// Centre of the positive pixel nearest to p (ties: smaller v, then smaller u).
Vec2 nearest_positive_pixel(const BinaryImage& image, const Vec2& p);

/// Mean distance of the two end keypoints.
double corner_error(const KeypointSequence& pred, const KeypointSequence& truth);
/// Mean distance over all keypoints.
double keypoint_error(const KeypointSequence& pred, const KeypointSequence& truth);

/// Raster of the polyline through the keypoints (image frame, thickness in pixels).
BinaryImage reconstruct_from_keypoints(const KeypointSequence& kps, double half_thickness_px,
                                       ImageDims dims);

}  // namespace dlo
