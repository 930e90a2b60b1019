#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dlo/planner.hpp"
#include "dlo/raster.hpp"
#include "dlo/world.hpp"

namespace dlo {

/// A fully instantiated episode setup (world frame, metres).
struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  PolylineCurve goal;
  PolylineCurve initial;
  std::vector<Contact> contacts;
  std::array<Workspace, 2> workspaces{Workspace{{-0.3, -0.22}, 0.06, 0.55},
                                      Workspace{{0.3, -0.22}, 0.06, 0.55}};
  Roi roi{-0.3, -0.15, 0.3, 0.15};
  ImageDims dims{128, 64};
  std::size_t nodes = 64;
  double half_thickness = 0.012;
  int m = 16;
  PlannerConfig planner;
  SimConfig sim;
};

/// Initial world: rope resampled from `initial` with the goal's length, relaxed.
WorldState initial_world(const Scenario& scenario);

struct StepRecord {
  int step = 0;
  double iou = 0.0;
  /// Shape error in pixels.
  double delta_p = 0.0;
  std::vector<Vec2> rope;
  /// Detected keypoints in world frame, aligned with the goal.
  std::vector<Vec2> keypoints;
  /// Plan executed after this observation; primitive none on the final record.
  PlanResult plan;
  StepStats stats;
};

enum class Outcome { success, step_limit, planning_failed, perception_failed, execution_failed };
const char* outcome_name(Outcome o);

struct EpisodeLog {
  std::string scenario;
  std::uint64_t seed = 0;
  PlannerConfig config;
  std::vector<Contact> contacts;
  std::array<Workspace, 2> workspaces;
  Roi roi;
  ImageDims dims;
  double half_thickness = 0.0;
  std::vector<Vec2> goal;
  std::vector<Vec2> goal_keypoints;
  BenchmarkSet benchmarks;
  std::vector<StepRecord> steps;
  Outcome outcome = Outcome::step_limit;
  std::string reason;

  bool success() const { return outcome == Outcome::success; }
  /// Number of executed primitives.
  int actions() const;
};

/// Detector used inside the loop: geometric detection with cleanup, finetuned, in
/// world frame. Throws on perception failure.
std::vector<Vec2> detect_world_keypoints(const BinaryImage& image, int m, const WorldImageMap& map);

/// Observe, detect, check IoU, plan, execute; repeated until the goal IoU threshold
/// is exceeded or max_steps primitives were executed.
EpisodeLog run_episode(const Scenario& scenario);

/// Line-delimited JSON: one header record, one record per step, one result record.
std::string episode_jsonl(const EpisodeLog& log);
EpisodeLog parse_episode_jsonl(const std::string& text);

}  // namespace dlo
