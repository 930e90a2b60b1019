#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dlo/dataset.hpp"
#include "dlo/metrics.hpp"

namespace dlo {

enum class Split { train, test, all };
Split parse_split(const std::string& name);

/// Records of a generated dataset directory in manifest order.
std::vector<LabeledSample> load_dataset(const std::filesystem::path& dir, Split split);

/// Maps a sample to predicted keypoints in image frame. May throw dlo::Error, which
/// counts the sample as a detection failure.
using DetectorFn = std::function<KeypointSequence(const LabeledSample&)>;

/// Geometric baseline with skeleton cleanup; `finetune` snaps the result onto the body.
DetectorFn geometric_detector(bool finetune);
/// Passes the ground-truth labels through.
DetectorFn oracle_detector();

struct DetectorEvaluation {
  std::string name;
  std::size_t samples = 0;
  std::size_t failures = 0;
  RunningStats corner;
  RunningStats keypoint;
  /// Keypoints per sample that do not lie on a positive pixel.
  RunningStats off_body;

  /// mu_C / var_C, mu_P / var_P, off-body count and failure count.
  std::vector<MetricReport> reports() const;
};

/// Statistics are accumulated in sample order, so the result does not depend on jobs.
DetectorEvaluation evaluate_detector(std::string name, const DetectorFn& detector,
                                     std::span<const LabeledSample> samples, int jobs = 1);

struct ReconstructionEvaluation {
  RunningStats iou;
  RunningStats l1;
  std::vector<MetricReport> reports() const;
};

/// Rasterizes the polyline through the ground-truth keypoints at the sample's
/// thickness and compares it with the sample image.
ReconstructionEvaluation evaluate_reconstruction(std::span<const LabeledSample> samples, int jobs = 1);

/// Number of keypoints whose containing pixel is not positive.
std::size_t off_body_count(const KeypointSequence& kps, const BinaryImage& image);

}  // namespace dlo
