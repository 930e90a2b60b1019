#include "dlo/world.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>

#include "dlo/error.hpp"

namespace dlo {

const char* arm_name(Arm a) { return a == Arm::left ? "left" : "right"; }

bool Workspace::contains(const Vec2& p) const {
  const double d = (p - center).norm();
  return d >= r_inner && d <= r_outer;
}

double Rope::length() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) sum += (nodes[i] - nodes[i - 1]).norm();
  return sum;
}

double Rope::rest_length() const {
  return nodes.size() < 2 ? 0.0 : segment_length * static_cast<double>(nodes.size() - 1);
}

PolylineCurve Rope::curve() const { return PolylineCurve(nodes); }

Rope make_rope(const PolylineCurve& curve, std::size_t n, double half_thickness) {
  if (n < 2) throw ParameterError("rope needs at least two nodes");
  if (half_thickness < 0.0) throw ParameterError("rope half thickness must be non-negative");
  Rope rope;
  rope.nodes = curve.resample_count(n).points();
  rope.segment_length = curve.length() / static_cast<double>(n - 1);
  rope.half_thickness = half_thickness;
  return rope;
}

void ActionPlan::validate(std::size_t node_count) const {
  for (Arm a : kArms) {
    bool holding = false;
    bool released = false;
    for (const auto& step : arm(a)) {
      if (released) throw ParameterError(fmt::format("{} arm: step after release", arm_name(a)));
      if (const auto* g = std::get_if<Grasp>(&step)) {
        if (holding) throw ParameterError(fmt::format("{} arm: second grasp", arm_name(a)));
        if (g->node >= node_count) {
          throw ParameterError(fmt::format("{} arm: grasp node {} out of range", arm_name(a), g->node));
        }
        holding = true;
      } else if (std::holds_alternative<MoveTo>(step)) {
        if (!holding) throw ParameterError(fmt::format("{} arm: move without grasp", arm_name(a)));
      } else {
        if (!holding) throw ParameterError(fmt::format("{} arm: release without grasp", arm_name(a)));
        released = true;
      }
    }
  }
}

namespace {

double angle_wrap(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

std::vector<bool> pinned_mask(const WorldState& w) {
  std::vector<bool> pinned(w.rope.size(), false);
  for (const auto& g : w.grippers) {
    if (g.grasped) pinned[*g.grasped] = true;
  }
  return pinned;
}

// `lead` marks the node the correction is propagated from: on a free tail beyond the
// outermost grasp the node nearer the grasp is held, so a pull travels the whole
// tail in one sweep.
void project_distance(std::vector<Vec2>& x, std::size_t i, double rest, const std::vector<bool>& pinned,
                      int lead = 0) {
  const double wi = pinned[i] || lead < 0 ? 0.0 : 1.0;
  const double wj = pinned[i + 1] || lead > 0 ? 0.0 : 1.0;
  if (wi + wj == 0.0) return;
  Vec2 d = x[i + 1] - x[i];
  double len = d.norm();
  if (len < 1e-12) {
    d = Vec2(1.0, 0.0);
    len = 0.0;
  } else {
    d /= len;
  }
  const double c = len - rest;
  x[i] += (wi / (wi + wj)) * c * d;
  x[i + 1] -= (wj / (wi + wj)) * c * d;
}

void project_contacts(std::vector<Vec2>& x, const std::vector<Contact>& contacts, double ht,
                      const std::vector<bool>& pinned) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (pinned[i]) continue;
    for (const auto& c : contacts) {
      const double r = c.radius + ht;
      Vec2 d = x[i] - c.center;
      const double len = d.norm();
      if (len >= r) continue;
      d = len < 1e-12 ? Vec2(1.0, 0.0) : Vec2(d / len);
      x[i] = c.center + r * d;
    }
  }
}

void limit_bending(std::vector<Vec2>& x, double limit, const std::vector<bool>& pinned) {
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (pinned[i]) continue;
    const Vec2 a = x[i] - x[i - 1];
    const Vec2 b = x[i + 1] - x[i];
    if (a.squaredNorm() == 0.0 || b.squaredNorm() == 0.0) continue;
    const double turn = angle_between(a, b);
    if (turn <= limit) continue;
    const Vec2 mid = 0.5 * (x[i - 1] + x[i + 1]);
    x[i] += 0.5 * (1.0 - limit / turn) * (mid - x[i]);
  }
}

// A chain compressed between two pinned nodes cannot shorten along its own line, so
// each free node with two short segments is lifted off the chord of its neighbours,
// all to the side the span already bulges towards.
void buckle(std::vector<Vec2>& x, double rest, const std::vector<bool>& pinned) {
  std::size_t lo = 0;
  while (lo < x.size() && !pinned[lo]) ++lo;
  while (lo < x.size()) {
    std::size_t hi = lo + 1;
    while (hi < x.size() && !pinned[hi]) ++hi;
    if (hi >= x.size()) break;
    const Vec2 chord = x[hi] - x[lo];
    double area = 0.0;
    for (std::size_t i = lo + 1; i < hi; ++i) area += cross(chord, x[i] - x[lo]);
    const double side = area >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const Vec2 a = x[i - 1];
      const Vec2 b = x[i + 1];
      const Vec2 ab = b - a;
      const double d = ab.norm();
      if ((x[i] - a).norm() >= rest || (b - x[i]).norm() >= rest || d >= 2.0 * rest || d < 1e-12) continue;
      x[i] = 0.5 * (a + b) + std::sqrt(rest * rest - 0.25 * d * d) * side * perp(ab / d);
    }
    lo = hi;
  }
}

double max_violation(const std::vector<Vec2>& x, double rest, const std::vector<Contact>& contacts,
                     double ht) {
  double v = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) v = std::max(v, std::abs((x[i] - x[i - 1]).norm() - rest));
  for (const auto& p : x) {
    for (const auto& c : contacts) v = std::max(v, c.radius + ht - (p - c.center).norm());
  }
  return v;
}

}  // namespace

int relax_in_place(WorldState& w) {
  auto& x = w.rope.nodes;
  if (x.size() < 2) return 0;
  const auto pinned = pinned_mask(w);
  for (const auto& g : w.grippers) {
    if (g.grasped) x[*g.grasped] = g.pose.position;
  }
  const double rest = w.rope.segment_length;
  const double ht = w.rope.half_thickness;
  if (max_violation(x, rest, w.contacts, ht) < w.sim.tolerance) {
    w.unconverged = false;
    return 0;
  }
  const std::size_t segs = x.size() - 1;
  std::optional<std::size_t> first_pin;
  std::optional<std::size_t> last_pin;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!pinned[i]) continue;
    if (!first_pin) first_pin = i;
    last_pin = i;
  }
  for (int it = 1; it <= w.sim.max_iterations; ++it) {
    buckle(x, rest, pinned);
    limit_bending(x, w.sim.bend_limit, pinned);
    for (std::size_t i = 0; i < segs; ++i) project_distance(x, i, rest, pinned, last_pin && i >= *last_pin ? -1 : 0);
    for (std::size_t i = segs; i-- > 0;) {
      project_distance(x, i, rest, pinned, first_pin && i + 1 <= *first_pin ? 1 : 0);
    }
    project_contacts(x, w.contacts, ht, pinned);
    if (max_violation(x, rest, w.contacts, ht) < w.sim.tolerance) {
      w.unconverged = false;
      return it;
    }
  }
  w.unconverged = true;
  return w.sim.max_iterations;
}

WorldState relax(const WorldState& world) {
  WorldState w = world;
  relax_in_place(w);
  return w;
}

double max_penetration(const WorldState& world) {
  double depth = 0.0;
  for (const auto& p : world.rope.nodes) {
    for (const auto& c : world.contacts) {
      depth = std::max(depth, c.radius + world.rope.half_thickness - (p - c.center).norm());
    }
  }
  return depth;
}

double length_drift(const Rope& rope) {
  const double rest = rope.rest_length();
  return rest > 0.0 ? std::abs(rope.length() - rest) / rest : 0.0;
}

bool collides(const WorldState& world, const Vec2& position) {
  for (const auto& c : world.contacts) {
    if ((position - c.center).norm() < c.radius + world.sim.clearance) return true;
  }
  return false;
}

bool reachable(const WorldState& world, Arm arm, const Vec2& position) {
  const Workspace& ws = world.workspace(arm);
  if (!ws.contains(position)) return false;
  for (const auto& c : world.contacts) {
    if (segment_hits_disk(ws.center, position, c.center, c.radius + world.sim.clearance)) return false;
  }
  return true;
}

BinaryImage observe(const WorldState& world, const Roi& roi, ImageDims dims) {
  return rasterize(world.rope.curve(), world.rope.half_thickness, dims, roi);
}

namespace {

// Linear position / shortest-arc heading interpolation of a pose path into pieces of
// at most `max_step` metres.
std::vector<Pose> interpolate_path(const Pose& start, const std::vector<Pose>& path, double max_step) {
  std::vector<Pose> out;
  Pose prev = start;
  for (const auto& target : path) {
    const double dist = (target.position - prev.position).norm();
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dist / max_step)));
    const double dh = angle_wrap(target.heading - prev.heading);
    for (std::size_t k = 1; k <= pieces; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(pieces);
      out.push_back({prev.position + t * (target.position - prev.position), angle_wrap(prev.heading + t * dh)});
    }
    out.back() = target;
    prev = target;
  }
  return out;
}

void check_path(const WorldState& w, Arm arm, const Pose& start, const std::vector<Pose>& path) {
  Vec2 prev = start.position;
  for (const auto& pose : path) {
    if (!w.workspace(arm).contains(pose.position)) {
      throw ReachabilityError(fmt::format("{} arm: move target ({:.4f}, {:.4f}) outside workspace",
                                          arm_name(arm), pose.position.x(), pose.position.y()));
    }
    for (std::size_t k = 0; k < w.contacts.size(); ++k) {
      const auto& c = w.contacts[k];
      if (segment_hits_disk(prev, pose.position, c.center, c.radius + w.sim.clearance)) {
        throw CollisionError(fmt::format("{} arm: path to ({:.4f}, {:.4f}) enters contact {}",
                                         arm_name(arm), pose.position.x(), pose.position.y(), k + 1));
      }
    }
    prev = pose.position;
  }
}

// When both arms move, free nodes between the grasps follow the blend of the grasp displacements, so a span
// held at both ends translates with them instead of waiting on the length projection.
void carry_span(WorldState& w, const WorldState& before) {
  const auto& l = w.gripper(Arm::left);
  const auto& r = w.gripper(Arm::right);
  if (!l.grasped || !r.grasped) return;
  std::size_t lo = *l.grasped;
  std::size_t hi = *r.grasped;
  Vec2 dlo = l.pose.position - before.gripper(Arm::left).pose.position;
  Vec2 dhi = r.pose.position - before.gripper(Arm::right).pose.position;
  if (lo > hi) {
    std::swap(lo, hi);
    std::swap(dlo, dhi);
  }
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double t = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
    w.rope.nodes[i] += (1.0 - t) * dlo + t * dhi;
  }
}

}  // namespace

WorldState apply_action(const WorldState& world, const ActionPlan& plan) {
  WorldState w = world;
  w.last_step = {};
  if (plan.empty()) return w;
  plan.validate(w.rope.size());

  // Grasps.
  for (Arm a : kArms) {
    auto& g = w.grippers[arm_index(a)];
    for (const auto& step : plan.arm(a)) {
      if (const auto* grasp = std::get_if<Grasp>(&step)) {
        const Vec2 p = w.rope.nodes[grasp->node];
        if (!reachable(w, a, p)) {
          throw ReachabilityError(fmt::format("{} arm cannot reach node {} at ({:.4f}, {:.4f})",
                                              arm_name(a), grasp->node, p.x(), p.y()));
        }
        const std::size_t i = grasp->node;
        const Vec2 t = w.rope.nodes[std::min(i + 1, w.rope.size() - 1)] - w.rope.nodes[i > 0 ? i - 1 : 0];
        g.grasped = i;
        g.pose = {p, std::atan2(t.y(), t.x())};
      }
    }
  }
  if (w.gripper(Arm::left).grasped && w.gripper(Arm::right).grasped &&
      *w.gripper(Arm::left).grasped == *w.gripper(Arm::right).grasped) {
    throw ParameterError("both arms grasp the same node");
  }

  // Moves, in lockstep.
  std::array<std::vector<Pose>, 2> substeps;
  const double max_step = 0.5 * w.rope.segment_length;
  for (Arm a : kArms) {
    std::vector<Pose> path;
    for (const auto& step : plan.arm(a)) {
      if (const auto* mv = std::get_if<MoveTo>(&step)) path.insert(path.end(), mv->path.begin(), mv->path.end());
    }
    if (path.empty()) continue;
    check_path(w, a, w.gripper(a).pose, path);
    substeps[arm_index(a)] = interpolate_path(w.gripper(a).pose, path, max_step);
  }
  const std::size_t count = std::max(substeps[0].size(), substeps[1].size());
  std::array<bool, 2> active{!substeps[0].empty(), !substeps[1].empty()};
  for (std::size_t k = 0; k < count; ++k) {
    std::array<bool, 2> moving{};
    for (Arm a : kArms) {
      const auto i = arm_index(a);
      moving[i] = active[i] && k < substeps[i].size();
    }
    if (!moving[0] && !moving[1]) break;
    // Try both arms, then each alone; an arm whose motion would stretch or squeeze the rope or
    // press it into a contact stops.
    std::vector<std::array<bool, 2>> attempts{moving};
    if (moving[0] && moving[1]) {
      attempts.push_back({true, false});
      attempts.push_back({false, true});
    }
    bool accepted = false;
    for (const auto& attempt : attempts) {
      WorldState trial = w;
      for (Arm a : kArms) {
        if (attempt[arm_index(a)]) trial.grippers[arm_index(a)].pose = substeps[arm_index(a)][k];
      }
      if (attempt[0] && attempt[1]) carry_span(trial, w);
      const int iters = relax_in_place(trial);
      const double drift = length_drift(trial.rope);
      const double rest = trial.rope.rest_length();
      if (std::abs(trial.rope.length() - rest) / rest > w.sim.stall_drift) continue;
      if (max_penetration(trial) > w.sim.tolerance) continue;
      trial.last_step = w.last_step;
      trial.last_step.relax_iterations += iters;
      trial.last_step.substeps += 1;
      trial.last_step.unconverged = trial.last_step.unconverged || trial.unconverged;
      trial.last_step.max_length_drift = std::max(trial.last_step.max_length_drift, drift);
      trial.last_step.max_penetration = std::max(trial.last_step.max_penetration, max_penetration(trial));
      for (Arm a : kArms) {
        const auto i = arm_index(a);
        if (moving[i] && !attempt[i]) {
          active[i] = false;
          trial.last_step.stalled[i] = true;
        }
      }
      w = std::move(trial);
      accepted = true;
      break;
    }
    if (!accepted) {
      for (Arm a : kArms) {
        if (moving[arm_index(a)]) {
          active[arm_index(a)] = false;
          w.last_step.stalled[arm_index(a)] = true;
        }
      }
    }
  }

  // Releases.
  for (Arm a : kArms) {
    for (const auto& step : plan.arm(a)) {
      if (std::holds_alternative<Release>(step)) w.grippers[arm_index(a)].grasped.reset();
    }
  }
  const int iters = relax_in_place(w);
  w.last_step.relax_iterations += iters;
  w.last_step.unconverged = w.last_step.unconverged || w.unconverged;
  w.last_step.max_length_drift = std::max(w.last_step.max_length_drift, length_drift(w.rope));
  w.last_step.max_penetration = std::max(w.last_step.max_penetration, max_penetration(w));
  return w;
}

}  // namespace dlo
