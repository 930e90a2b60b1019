#pragma once

#include <string>
#include <vector>

#include "dlo/episode.hpp"

namespace dlo {

/// Everything drawn in one frame, world frame.
struct SceneFrame {
  std::string title;
  Roi roi;
  ImageDims dims;
  double half_thickness = 0.0;
  std::vector<Vec2> goal;
  std::vector<Vec2> rope;
  std::vector<Vec2> keypoints;
  std::vector<Contact> contacts;
  BenchmarkSet benchmarks;
  ActionPlan plan;
};

/// Frame of log step `step`. Throws ParameterError when there is no such step.
SceneFrame frame_from_log(const EpisodeLog& log, std::size_t step);

/// Frame of a scenario's initial world, before any observation.
SceneFrame frame_from_scenario(const Scenario& scenario);

/// SVG with one polyline for the rope, one circle per contact, one rect per keypoint,
/// one polygon per benchmark, the goal as a dashed path and one line per plan move.
/// `scale` is output pixels per image pixel. Output depends only on the frame.
std::string render_svg(const SceneFrame& frame, double scale = 6.0);

/// Binary observation of the rope alone, as the camera would see it.
BinaryImage render_mask(const SceneFrame& frame);

}  // namespace dlo
