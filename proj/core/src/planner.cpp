#include "dlo/planner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dlo/error.hpp"

namespace dlo {

PlannerConfig PlannerConfig::defaults(double contact_radius, double half_thickness) {
  PlannerConfig c;
  c.tau_i = contact_radius + half_thickness;
  c.tau_e = contact_radius + 6.0 * half_thickness;
  c.tau_c = c.tau_e;
  c.tau_a = kPi / 3.0;
  c.tau_b = contact_radius + 0.02;
  return c;
}

void PlannerConfig::validate(double contact_radius) const {
  if (!(tau_i < tau_e)) throw ParameterError("tau_i must be below tau_e");
  if (!(tau_c > contact_radius)) throw ParameterError("tau_c must exceed the contact radius");
  if (!(tau_a > 0.0 && tau_a < kPi)) throw ParameterError("tau_a must lie in (0, pi)");
  if (!(tau_b > contact_radius)) throw ParameterError("tau_b must exceed the contact radius");
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) throw ParameterError("iou_threshold must lie in [0, 1]");
  if (max_steps < 0) throw ParameterError("max_steps must be non-negative");
  if (heading_sign != 1 && heading_sign != -1) throw ParameterError("heading_sign must be +1 or -1");
}

const char* primitive_name(Primitive p) {
  switch (p) {
    case Primitive::contact: return "contact";
    case Primitive::shape: return "shape";
    default: return "none";
  }
}

namespace {

double signed_angle(const Vec2& a, const Vec2& b) { return std::atan2(cross(a, b), a.dot(b)); }

// Angle swept around `center` while walking the curve from index i to j.
double swept_angle(const PolylineCurve& curve, const Vec2& center, std::size_t i, std::size_t j) {
  double sum = 0.0;
  for (std::size_t k = i; k < j; ++k) sum += signed_angle(curve[k] - center, curve[k + 1] - center);
  return sum;
}

}  // namespace

BenchmarkSet compute_benchmarks(const PolylineCurve& goal, std::span<const Contact> contacts,
                                const PlannerConfig& config) {
  BenchmarkSet out;
  out.reserve(contacts.size());
  for (std::size_t k = 0; k < contacts.size(); ++k) {
    const Vec2 c = contacts[k].center;
    std::optional<std::size_t> b1;
    std::size_t b3 = 0;
    double far = -1.0;
    double near = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < goal.size(); ++i) {
      const double d = (goal[i] - c).norm();
      if (d < near) {
        near = d;
        b3 = i;
      }
      if (d > config.tau_i && d < config.tau_e && d > far) {
        far = d;
        b1 = i;
      }
    }
    if (!b1) throw InfeasibleGoalError(k);
    std::size_t b2 = *b1;
    double spread = -1.0;
    for (std::size_t i = 0; i < goal.size(); ++i) {
      const double d = (goal[i] - c).norm();
      if (!(d > config.tau_i && d < config.tau_e)) continue;
      const double e = (goal[i] - goal[*b1]).norm();
      if (e > spread) {
        spread = e;
        b2 = i;
      }
    }
    std::array<std::size_t, 3> idx{*b1, b2, b3};
    std::sort(idx.begin(), idx.end());
    ContactBenchmarks cb;
    for (std::size_t b = 0; b < 3; ++b) {
      cb.b[b].point = goal[idx[b]];
      cb.b[b].curve_index = idx[b];
      cb.b[b].extended = cb.b[b].point;
    }
    cb.sweep = swept_angle(goal, c, idx[0], idx[2]);
    cb.sweep_first = swept_angle(goal, c, idx[0], idx[1]);
    out.push_back(cb);
  }
  return out;
}

bool benchmark_satisfied(std::span<const Vec2> state, const Contact& contact, const Vec2& benchmark,
                         const PlannerConfig& config) {
  const Vec2 ref = benchmark - contact.center;
  for (const auto& s : state) {
    const Vec2 d = s - contact.center;
    if (d.norm() < config.tau_c && angle_between(d, ref) < config.tau_a) return true;
  }
  return false;
}

bool contact_qualified(std::span<const Vec2> state, const Contact& contact, const ContactBenchmarks& b,
                       const PlannerConfig& config) {
  return std::all_of(b.b.begin(), b.b.end(), [&](const Benchmark& x) {
    return benchmark_satisfied(state, contact, x.point, config);
  });
}

std::optional<std::size_t> contact_search(std::span<const Vec2> state, std::span<const Contact> contacts,
                                          const BenchmarkSet& benchmarks, const PlannerConfig& config) {
  const std::size_t q = contacts.size();
  for (std::size_t n = 0; n < q; ++n) {
    const std::size_t k = (n + 1) % q;
    if (!contact_qualified(state, contacts[k], benchmarks[k], config)) return k;
  }
  return std::nullopt;
}

Vec2 extend_benchmark(const Vec2& benchmark, const Contact& contact, double tau_b) {
  const Vec2 d = benchmark - contact.center;
  const double len = d.norm();
  if (len == 0.0) throw DegenerateDirectionError("benchmark coincides with its contact centre");
  return contact.center + tau_b * d / len;
}

void extend_benchmarks(BenchmarkSet& benchmarks, std::span<const Contact> contacts, double tau_b) {
  if (!(tau_b > 0.0)) throw ParameterError("tau_b must be positive");
  for (std::size_t k = 0; k < benchmarks.size(); ++k) {
    for (auto& b : benchmarks[k].b) b.extended = extend_benchmark(b.point, contacts[k], tau_b);
  }
}

std::size_t pair_index(std::span<const Vec2> goal_keypoints, const Vec2& benchmark) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < goal_keypoints.size(); ++j) {
    const double d = (goal_keypoints[j] - benchmark).norm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

void pair_indices(BenchmarkSet& benchmarks, std::span<const Vec2> goal_keypoints) {
  for (auto& cb : benchmarks) {
    for (auto& b : cb.b) b.keypoint = pair_index(goal_keypoints, b.point);
  }
}

double shape_error(std::span<const Vec2> current, std::span<const Vec2> goal) {
  if (current.size() != goal.size() || current.empty()) {
    throw ParameterError("keypoint sequences differ in length");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < current.size(); ++j) sum += (current[j] - goal[j]).norm();
  return sum / static_cast<double>(current.size());
}

GoalModel make_goal_model(const PolylineCurve& goal_curve, std::vector<Vec2> goal_keypoints,
                          std::span<const Contact> contacts, const PlannerConfig& config) {
  GoalModel g;
  g.curve = goal_curve;
  g.keypoints = std::move(goal_keypoints);
  g.benchmarks = compute_benchmarks(goal_curve, contacts, config);
  extend_benchmarks(g.benchmarks, contacts, config.tau_b);
  pair_indices(g.benchmarks, g.keypoints);
  return g;
}

std::size_t nearest_node(const Rope& rope, const Vec2& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rope.size(); ++i) {
    const double d = (rope.nodes[i] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace {

bool segment_clear(const WorldState& w, const Vec2& a, const Vec2& b) {
  for (const auto& c : w.contacts) {
    if (segment_hits_disk(a, b, c.center, c.radius + w.sim.clearance)) return false;
  }
  return true;
}

bool polyline_clear(const WorldState& w, const Vec2& from, const std::vector<Vec2>& pts) {
  Vec2 prev = from;
  for (const auto& p : pts) {
    if (!segment_clear(w, prev, p)) return false;
    prev = p;
  }
  return true;
}

// Points on a circle around `center`, starting at angle `a0` and sweeping `delta`,
// spaced at most 20 degrees apart (first point included).
std::vector<Vec2> arc_points(const Vec2& center, double radius, double a0, double delta) {
  constexpr double kStep = kPi / 9.0;
  const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(delta) / kStep)));
  std::vector<Vec2> out;
  for (std::size_t i = 0; i <= pieces; ++i) {
    const double a = a0 + delta * static_cast<double>(i) / static_cast<double>(pieces);
    out.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
  }
  return out;
}

double polar_angle(const Vec2& d) { return std::atan2(d.y(), d.x()); }

}  // namespace

std::optional<std::vector<Vec2>> route(const WorldState& world, const Vec2& from, const Vec2& to,
                                       double detour_radius) {
  if (segment_clear(world, from, to)) return std::vector<Vec2>{to};
  // Detour around the first blocking contact along the straight segment.
  std::optional<std::size_t> block;
  double first_t = std::numeric_limits<double>::infinity();
  const Vec2 ab = to - from;
  for (std::size_t k = 0; k < world.contacts.size(); ++k) {
    const auto& c = world.contacts[k];
    if (!segment_hits_disk(from, to, c.center, c.radius + world.sim.clearance)) continue;
    const double t = ab.squaredNorm() > 0.0 ? (c.center - from).dot(ab) / ab.squaredNorm() : 0.0;
    if (t < first_t) {
      first_t = t;
      block = k;
    }
  }
  const auto& c = world.contacts[*block];
  const double radius = std::max(detour_radius, c.radius + world.sim.clearance + 0.005);
  const double a0 = polar_angle(from - c.center);
  const double a1 = polar_angle(to - c.center);
  double delta = std::remainder(a1 - a0, 2.0 * kPi);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double d = attempt == 0 ? delta : (delta > 0.0 ? delta - 2.0 * kPi : delta + 2.0 * kPi);
    std::vector<Vec2> pts = arc_points(c.center, radius, a0, d);
    pts.push_back(to);
    if (polyline_clear(world, from, pts)) return pts;
  }
  return std::nullopt;
}

namespace {

bool all_in_ring(const Workspace& ws, const std::vector<Vec2>& pts) {
  return std::all_of(pts.begin(), pts.end(), [&](const Vec2& p) { return ws.contains(p); });
}

std::vector<Pose> poses_with_heading(const std::vector<Vec2>& pts, double heading) {
  std::vector<Pose> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({p, heading});
  return out;
}

double heading_of(const Vec2& v) { return std::atan2(v.y(), v.x()); }

// Benchmarks are tested against the keypoint polyline, densified well below the rope
// thickness.
PolylineCurve state_curve(const WorldState& world, std::span<const Vec2> keypoints) {
  std::vector<Vec2> kp(keypoints.begin(), keypoints.end());
  return keypoints_polyline(KeypointSequence{std::move(kp), Frame::world})
      .densified(0.25 * world.rope.half_thickness + 1e-3);
}

std::vector<std::size_t> index_walk(std::size_t from, std::size_t to) {
  std::vector<std::size_t> out;
  if (from <= to) {
    for (std::size_t j = from; j <= to; ++j) out.push_back(j);
  } else {
    for (std::size_t j = from + 1; j-- > to;) out.push_back(j);
  }
  return out;
}

}  // namespace

PlanResult contact_primitive_step(const WorldState& world, std::span<const Vec2> keypoints,
                                  const GoalModel& goal, std::size_t k, const PlannerConfig& config) {
  const auto& cb = goal.benchmarks.at(k);
  const Contact& contact = world.contacts.at(k);
  const std::size_t m = keypoints.size();
  const std::size_t q = world.contacts.size();
  const bool end_contact = k == 0 || k + 1 == q;
  const std::size_t j1 = cb.b[0].keypoint;
  const std::size_t j2 = cb.b[1].keypoint;
  const std::size_t j3 = cb.b[2].keypoint;

  std::array<std::vector<std::size_t>, 2> candidates;
  if (end_contact) {
    candidates[arm_index(Arm::left)] = index_walk(0, std::min(j1, m - 1));
    candidates[arm_index(Arm::right)] = index_walk(m - 1, std::min(j3, m - 1));
  } else {
    if (j2 > 0) candidates[arm_index(Arm::left)] = index_walk(j2 - 1, 0);
    if (j2 + 1 < m) candidates[arm_index(Arm::right)] = index_walk(j2 + 1, m - 1);
  }

  // The right arm finishes at B'3 and the left at B'1 (with the default sweep
  // direction); an arm whose terminal benchmark is still unmet goes first.
  const PolylineCurve state = state_curve(world, keypoints);
  const std::size_t right_b = config.right_runs_forward ? 2 : 0;
  const bool right_done = benchmark_satisfied(state.points(), contact, cb.b[right_b].point, config);
  const bool left_done = benchmark_satisfied(state.points(), contact, cb.b[2 - right_b].point, config);
  Arm preferred = reachable(world, Arm::right, cb.b[0].extended) ? Arm::right : Arm::left;
  if (right_done != left_done) preferred = right_done ? Arm::left : Arm::right;
  const Arm fallback = preferred == Arm::right ? Arm::left : Arm::right;
  for (Arm mover : {preferred, fallback}) {
    const Arm fixer = mover == Arm::right ? Arm::left : Arm::right;
    const bool forward = (mover == Arm::right) == config.right_runs_forward;
    // Arc at tau_b following the goal's sweep around the contact, ending at the
    // mover's own end benchmark. A grasp already inside the swept sector starts
    // from its own bearing instead of travelling back to the first benchmark.
    const double theta0 = polar_angle((forward ? cb.b[0].extended : cb.b[2].extended) - contact.center);
    const double total = forward ? cb.sweep : -cb.sweep;
    auto sweep_from = [&](const Vec2& pos) {
      const double dir = total >= 0.0 ? 1.0 : -1.0;
      const double phi = polar_angle(pos - contact.center);
      double u = std::fmod(dir * (phi - theta0), 2.0 * kPi);
      if (u < 0.0) u += 2.0 * kPi;
      if (u <= std::abs(total)) return arc_points(contact.center, config.tau_b, phi, dir * (std::abs(total) - u));
      return arc_points(contact.center, config.tau_b, theta0, total);
    };

    std::optional<std::size_t> fix_kp;
    std::optional<std::size_t> fix_node;
    for (std::size_t j : candidates[arm_index(fixer)]) {
      const std::size_t node = nearest_node(world.rope, keypoints[j]);
      if (!reachable(world, fixer, world.rope.nodes[node])) continue;
      fix_kp = j;
      fix_node = node;
      break;
    }
    if (!fix_node) continue;
    const Vec2 fix_pos = world.rope.nodes[*fix_node];

    for (std::size_t j : candidates[arm_index(mover)]) {
      const std::size_t node = nearest_node(world.rope, keypoints[j]);
      if (node == *fix_node) continue;
      if ((mover == Arm::left) != (node < *fix_node)) continue;
      const Vec2 pos = world.rope.nodes[node];
      if (!reachable(world, mover, pos)) continue;
      const std::vector<Vec2> arc = sweep_from(pos);
      const auto approach = route(world, pos, arc.front(), config.tau_b);
      if (!approach) continue;
      std::vector<Vec2> path = *approach;
      path.insert(path.end(), arc.begin() + 1, arc.end());
      if (!all_in_ring(world.workspace(mover), path)) continue;
      if (!polyline_clear(world, pos, path)) continue;
      const double slack = world.rope.segment_length *
                           static_cast<double>(node > *fix_node ? node - *fix_node : *fix_node - node);
      const bool taut = std::any_of(path.begin(), path.end(),
                                    [&](const Vec2& p) { return (p - fix_pos).norm() > slack; });
      if (taut) continue;

      PlanResult r;
      r.primitive = Primitive::contact;
      r.contact = k;
      r.mover = mover;
      r.grasp.keypoint[arm_index(fixer)] = fix_kp;
      r.grasp.node[arm_index(fixer)] = fix_node;
      r.grasp.keypoint[arm_index(mover)] = j;
      r.grasp.node[arm_index(mover)] = node;
      r.target[arm_index(mover)] = path.back();

      std::vector<Pose> poses;
      for (std::size_t i = 0; i < path.size(); ++i) {
        const Vec2 radial = path[i] - contact.center;
        const Vec2 eta = static_cast<double>(config.heading_sign) * perp(radial);
        poses.push_back({path[i], heading_of(eta)});
      }
      // Approach poses take the heading of the first arc waypoint.
      const std::size_t arc_start = approach->size() - 1;
      for (std::size_t i = 0; i < arc_start; ++i) poses[i].heading = poses[arc_start].heading;

      r.plan.arm(fixer) = {Grasp{*fix_node}, Release{}};
      r.plan.arm(mover) = {Grasp{node}, MoveTo{std::move(poses)}, Release{}};
      return r;
    }
  }
  throw PlanningInfeasibleError(fmt::format("no feasible grasp pair for contact {}", k + 1));
}

std::array<std::size_t, 2> worst_pair(std::span<const Vec2> current, std::span<const Vec2> goal) {
  if (current.size() != goal.size() || current.size() < 2) {
    throw ParameterError("keypoint sequences differ in length");
  }
  std::size_t g = 0;
  std::size_t g2 = 1;
  std::vector<double> e(current.size());
  for (std::size_t j = 0; j < current.size(); ++j) e[j] = (current[j] - goal[j]).norm();
  for (std::size_t j = 1; j < e.size(); ++j) {
    if (e[j] > e[g]) g = j;
  }
  g2 = g == 0 ? 1 : 0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (j != g && e[j] > e[g2]) g2 = j;
  }
  return {std::min(g, g2), std::max(g, g2)};
}

std::vector<Vec2> align_to_goal(std::vector<Vec2> current, std::span<const Vec2> goal) {
  std::vector<Vec2> rev(current.rbegin(), current.rend());
  if (shape_error(rev, goal) < shape_error(current, goal)) return rev;
  return current;
}

namespace {

Vec2 goal_tangent(std::span<const Vec2> goal, std::size_t j) {
  const std::size_t m = goal.size();
  const std::size_t a = j == 0 ? 0 : j - 1;
  const std::size_t b = j + 1 == m ? m - 1 : j + 1;
  return goal[b] - goal[a];
}

}  // namespace

PlanResult shape_primitive_step(const WorldState& world, std::span<const Vec2> keypoints,
                                const GoalModel& goal, const PlannerConfig& config) {
  const std::size_t m = keypoints.size();
  const auto [gl, gr] = worst_pair(keypoints, goal.keypoints);
  PlanResult r;
  r.primitive = Primitive::shape;
  r.worst = std::array<std::size_t, 2>{gl, gr};

  std::array<std::vector<std::size_t>, 2> candidates{index_walk(gl, 0), index_walk(gr, m - 1)};
  std::optional<std::size_t> left_node;
  for (Arm a : kArms) {
    for (std::size_t j : candidates[arm_index(a)]) {
      const std::size_t node = nearest_node(world.rope, keypoints[j]);
      if (left_node && node <= *left_node) continue;
      const Vec2 pos = world.rope.nodes[node];
      const Vec2 target = goal.keypoints[j];
      if (!reachable(world, a, pos) || collides(world, target)) continue;
      const auto path = route(world, pos, target, config.tau_b);
      if (!path || !all_in_ring(world.workspace(a), *path)) continue;
      r.grasp.keypoint[arm_index(a)] = j;
      r.grasp.node[arm_index(a)] = node;
      r.target[arm_index(a)] = target;
      r.plan.arm(a) = {Grasp{node}, MoveTo{poses_with_heading(*path, heading_of(goal_tangent(goal.keypoints, j)))},
                       Release{}};
      if (a == Arm::left) left_node = node;
      break;
    }
  }
  if (r.plan.empty()) throw PlanningInfeasibleError("no arm can reach a shape target");
  // Targets further apart than the rope between the grasps would stall both arms;
  // keep only the arm with the larger keypoint error.
  const auto& gl_node = r.grasp.node[arm_index(Arm::left)];
  const auto& gr_node = r.grasp.node[arm_index(Arm::right)];
  if (gl_node && gr_node) {
    const double between = world.rope.segment_length * static_cast<double>(*gr_node - *gl_node);
    const Vec2 tl = *r.target[arm_index(Arm::left)];
    const Vec2 tr = *r.target[arm_index(Arm::right)];
    if ((tr - tl).norm() > between) {
      const auto jl = *r.grasp.keypoint[arm_index(Arm::left)];
      const auto jr = *r.grasp.keypoint[arm_index(Arm::right)];
      const double el = (keypoints[jl] - goal.keypoints[jl]).norm();
      const double er = (keypoints[jr] - goal.keypoints[jr]).norm();
      const Arm drop = el >= er ? Arm::right : Arm::left;
      r.plan.arm(drop).clear();
      r.grasp.keypoint[arm_index(drop)].reset();
      r.grasp.node[arm_index(drop)].reset();
      r.target[arm_index(drop)].reset();
    }
  }
  return r;
}

PlanResult plan_step(const WorldState& world, std::span<const Vec2> keypoints, const GoalModel& goal,
                     const PlannerConfig& config) {
  const PolylineCurve state = state_curve(world, keypoints);
  const auto k = contact_search(state.points(), world.contacts, goal.benchmarks, config);
  if (k) return contact_primitive_step(world, keypoints, goal, *k, config);
  return shape_primitive_step(world, keypoints, goal, config);
}

}  // namespace dlo
