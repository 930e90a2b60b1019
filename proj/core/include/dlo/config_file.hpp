#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dlo/dataset.hpp"
#include "dlo/episode.hpp"

namespace dlo {

// Both file kinds are YAML documents with a fixed schema (docs/formats.md). Unknown
// keys and malformed values raise ParameterError naming the line and column.

GenConfig parse_gen_config(const std::string& text);
GenConfig load_gen_config(const std::filesystem::path& path);

struct TurtleStep {
  /// Straight run length, or arc radius when `arc` is set.
  double length = 0.0;
  bool arc = false;
  double radius = 0.0;
  /// Signed arc angle in degrees, positive counter-clockwise.
  double angle_deg = 0.0;
};

struct TurtleSpec {
  Vec2 start = Vec2::Zero();
  double heading_deg = 0.0;
  std::vector<TurtleStep> steps;
};

struct FourierSpec {
  std::vector<FourierSegment> segments;
  Vec2 origin = Vec2::Zero();
  double rotation_deg = 0.0;
  /// Scale the concatenated curve to this length when positive.
  double length = 0.0;
};

struct ImageCurveSpec {
  std::filesystem::path path;
};

using CurveSpec = std::variant<std::vector<Vec2>, TurtleSpec, FourierSpec, ImageCurveSpec>;

/// Builds the curve in world frame. Image specs are skeletonized and mapped through
/// the given roi.
PolylineCurve build_curve(const CurveSpec& spec, const Roi& roi);

struct ScenarioSpec {
  Scenario base;
  CurveSpec goal;
  CurveSpec initial;
  double jitter_translation = 0.0;
  double jitter_rotation_deg = 0.0;
  /// Planner keys present in the file; others follow the contact-derived defaults.
  std::vector<std::string> planner_overrides;
};

ScenarioSpec parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioSpec load_scenario(const std::filesystem::path& path);

/// Curves built, planner defaults filled, initial placement jittered from `seed`
/// (the file's seed when absent).
Scenario instantiate(const ScenarioSpec& spec, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace dlo
