#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlo/geometry.hpp"
#include "dlo/world.hpp"

namespace dlo {

struct PlannerConfig {
  double tau_i = 0.0;
  double tau_e = 0.0;
  double tau_c = 0.0;
  double tau_a = kPi / 3.0;
  double tau_b = 0.0;
  double iou_threshold = 0.40;
  int max_steps = 20;
  /// Heading of contact waypoints: +1 rotates (c -> B') counter-clockwise, -1 clockwise.
  int heading_sign = 1;
  /// When true the right arm runs B'1 -> B'3 and the left arm B'3 -> B'1; false swaps.
  bool right_runs_forward = true;

  /// Defaults derived from the contact radius and rope half thickness.
  static PlannerConfig defaults(double contact_radius, double half_thickness);
  /// Throws ParameterError when thresholds are inconsistent for `contact_radius`.
  void validate(double contact_radius) const;
};

struct Benchmark {
  Vec2 point = Vec2::Zero();
  Vec2 extended = Vec2::Zero();
  /// Index of the point on the dense goal curve.
  std::size_t curve_index = 0;
  /// Paired goal keypoint (0-based).
  std::size_t keypoint = 0;
};

struct ContactBenchmarks {
  /// Ordered along the goal curve.
  std::array<Benchmark, 3> b;
  /// Signed angle swept around the contact by the goal curve from b[0] to b[2].
  double sweep = 0.0;
  /// Signed angle from b[0] to b[1].
  double sweep_first = 0.0;
};

using BenchmarkSet = std::vector<ContactBenchmarks>;

/// Annulus farthest point, the point farthest from it, and the nearest point overall,
/// then reordered along the curve. Throws InfeasibleGoalError for an empty annulus.
BenchmarkSet compute_benchmarks(const PolylineCurve& goal, std::span<const Contact> contacts,
                                const PlannerConfig& config);

bool benchmark_satisfied(std::span<const Vec2> state, const Contact& contact, const Vec2& benchmark,
                         const PlannerConfig& config);
bool contact_qualified(std::span<const Vec2> state, const Contact& contact, const ContactBenchmarks& b,
                       const PlannerConfig& config);

/// Scans contacts 2..q then 1 and returns the first one not qualified.
std::optional<std::size_t> contact_search(std::span<const Vec2> state, std::span<const Contact> contacts,
                                          const BenchmarkSet& benchmarks, const PlannerConfig& config);

/// B' = c + tau_b * unit(B - c). Throws DegenerateDirectionError when B == c.
Vec2 extend_benchmark(const Vec2& benchmark, const Contact& contact, double tau_b);
void extend_benchmarks(BenchmarkSet& benchmarks, std::span<const Contact> contacts, double tau_b);

/// Nearest goal keypoint to a benchmark; ties go to the smaller index.
std::size_t pair_index(std::span<const Vec2> goal_keypoints, const Vec2& benchmark);
void pair_indices(BenchmarkSet& benchmarks, std::span<const Vec2> goal_keypoints);

/// Mean distance between corresponding keypoints.
double shape_error(std::span<const Vec2> current, std::span<const Vec2> goal);

/// Everything the planner precomputes from the goal.
struct GoalModel {
  PolylineCurve curve;
  /// World frame, first point at the left end.
  std::vector<Vec2> keypoints;
  BenchmarkSet benchmarks;
};

GoalModel make_goal_model(const PolylineCurve& goal_curve, std::vector<Vec2> goal_keypoints,
                          std::span<const Contact> contacts, const PlannerConfig& config);

/// Rope node nearest to `p`; ties go to the smaller index.
std::size_t nearest_node(const Rope& rope, const Vec2& p);

/// Collision-free polyline from `from` to `to` around inflated contacts, or nothing.
std::optional<std::vector<Vec2>> route(const WorldState& world, const Vec2& from, const Vec2& to,
                                       double detour_radius);

struct GraspChoice {
  std::array<std::optional<std::size_t>, 2> keypoint;
  std::array<std::optional<std::size_t>, 2> node;
};

enum class Primitive { none, contact, shape };
const char* primitive_name(Primitive p);

struct PlanResult {
  Primitive primitive = Primitive::none;
  std::optional<std::size_t> contact;
  ActionPlan plan;
  GraspChoice grasp;
  std::optional<Arm> mover;
  /// Final target of each arm, if it moves.
  std::array<std::optional<Vec2>, 2> target;
  /// For the shape primitive: worst and second-worst keypoints.
  std::optional<std::array<std::size_t, 2>> worst;
};

/// Contact primitive for contact `k`. Throws PlanningInfeasibleError when no arm
/// assignment admits feasible grasps.
PlanResult contact_primitive_step(const WorldState& world, std::span<const Vec2> keypoints,
                                  const GoalModel& goal, std::size_t k, const PlannerConfig& config);

/// Shape primitive. Throws PlanningInfeasibleError when neither arm can act.
PlanResult shape_primitive_step(const WorldState& world, std::span<const Vec2> keypoints,
                                const GoalModel& goal, const PlannerConfig& config);

/// Two worst keypoints (g_L <= g_R) of a correspondence.
std::array<std::size_t, 2> worst_pair(std::span<const Vec2> current, std::span<const Vec2> goal);

/// Keypoints in goal correspondence: reversed when that lowers the shape error.
std::vector<Vec2> align_to_goal(std::vector<Vec2> current, std::span<const Vec2> goal);

/// Contact search over the densified keypoint polyline, then the matching primitive.
PlanResult plan_step(const WorldState& world, std::span<const Vec2> keypoints, const GoalModel& goal,
                     const PlannerConfig& config);

}  // namespace dlo
