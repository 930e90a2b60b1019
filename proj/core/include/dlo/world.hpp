#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "dlo/geometry.hpp"
#include "dlo/raster.hpp"

namespace dlo {

enum class Arm { left = 0, right = 1 };

inline constexpr std::array<Arm, 2> kArms{Arm::left, Arm::right};
inline std::size_t arm_index(Arm a) { return static_cast<std::size_t>(a); }
const char* arm_name(Arm a);

struct Contact {
  Vec2 center = Vec2::Zero();
  double radius = 0.04;
};

/// Ring-shaped reachable region of one arm.
struct Workspace {
  Vec2 center = Vec2::Zero();
  double r_inner = 0.06;
  double r_outer = 0.55;
  bool contains(const Vec2& p) const;
};

struct Pose {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
};

struct Gripper {
  Arm arm = Arm::left;
  std::optional<std::size_t> grasped;
  Pose pose;
};

/// Node chain with uniform rest length between consecutive nodes.
struct Rope {
  std::vector<Vec2> nodes;
  double segment_length = 0.0;
  double half_thickness = 0.01;

  std::size_t size() const { return nodes.size(); }
  /// Sum of current segment lengths.
  double length() const;
  double rest_length() const;
  PolylineCurve curve() const;
};

/// Resamples `curve` into n nodes spaced by equal arc length.
Rope make_rope(const PolylineCurve& curve, std::size_t n, double half_thickness);

struct SimConfig {
  int max_iterations = 2000;
  double tolerance = 1e-5;
  /// Extra radius around contacts that a gripper must keep clear of.
  double clearance = 0.01;
  /// Turning angle above which interior free nodes are smoothed.
  double bend_limit = kPi / 4.0;
  /// Substeps that would change the rope length by more than this fraction, or leave a node inside a
  /// contact deeper than `tolerance`, are rejected and the moving arm stops.
  double stall_drift = 0.005;
};

/// Per-call diagnostics of apply_action.
struct StepStats {
  int substeps = 0;
  int relax_iterations = 0;
  bool unconverged = false;
  /// Largest |length - rest| / rest seen after any substep.
  double max_length_drift = 0.0;
  /// Largest penetration depth into an inflated contact disk after relax.
  double max_penetration = 0.0;
  std::array<bool, 2> stalled{false, false};
};

struct WorldState {
  Rope rope;
  std::vector<Contact> contacts;
  std::array<Workspace, 2> workspaces;
  std::array<Gripper, 2> grippers{Gripper{Arm::left, {}, {}}, Gripper{Arm::right, {}, {}}};
  SimConfig sim;
  bool unconverged = false;
  StepStats last_step;

  const Workspace& workspace(Arm a) const { return workspaces[arm_index(a)]; }
  const Gripper& gripper(Arm a) const { return grippers[arm_index(a)]; }
};

struct Grasp {
  std::size_t node = 0;
};
struct MoveTo {
  std::vector<Pose> path;
};
struct Release {};
using ActionStep = std::variant<Grasp, MoveTo, Release>;

struct ActionPlan {
  std::array<std::vector<ActionStep>, 2> steps;

  std::vector<ActionStep>& arm(Arm a) { return steps[arm_index(a)]; }
  const std::vector<ActionStep>& arm(Arm a) const { return steps[arm_index(a)]; }
  bool empty() const { return steps[0].empty() && steps[1].empty(); }
  /// Throws ParameterError unless each arm runs Grasp, MoveTo*, Release in order.
  void validate(std::size_t node_count) const;
};

/// Settles the rope. Each iteration buckles compressed spans between pins, limits
/// bending, projects segment lengths forward then backward (free tails follow the
/// pinned side) and pushes nodes out of contacts. Never throws on non-convergence;
/// the result carries `unconverged` instead.
WorldState relax(const WorldState& world);
/// Number of iterations used by the last relax of `world` (for diagnostics).
int relax_in_place(WorldState& world);

/// Executes a plan: all grasps, then the move paths in lockstep substeps of at most
/// half a segment length, then all releases. When both arms move the span between
/// their grasps is carried along before it is relaxed.
WorldState apply_action(const WorldState& world, const ActionPlan& plan);

/// Position inside the arm's ring with a straight approach from the arm base that
/// stays clear of every contact inflated by the gripper clearance.
bool reachable(const WorldState& world, Arm arm, const Vec2& position);
/// True when `position` lies strictly inside a contact inflated by the clearance.
bool collides(const WorldState& world, const Vec2& position);

BinaryImage observe(const WorldState& world, const Roi& roi, ImageDims dims);

/// Largest depth of any node inside a contact inflated by the rope half thickness.
double max_penetration(const WorldState& world);
/// |length - rest| / rest.
double length_drift(const Rope& rope);

}  // namespace dlo
