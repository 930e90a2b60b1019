#include "dlo/episode.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

#include "dlo/error.hpp"
#include "dlo/metrics.hpp"
#include "dlo/perception.hpp"

namespace dlo {

using nlohmann::json;

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::step_limit: return "step_limit";
    case Outcome::planning_failed: return "planning_failed";
    case Outcome::perception_failed: return "perception_failed";
    case Outcome::execution_failed: return "execution_failed";
  }
  return "unknown";
}

int EpisodeLog::actions() const {
  int n = 0;
  for (const auto& s : steps) n += s.plan.primitive != Primitive::none;
  return n;
}

namespace {

// Rope curve with the goal's arc length: truncated, or extended along its last tangent.
PolylineCurve fit_length(const PolylineCurve& curve, double length) {
  const auto s = curve.cumulative_length();
  if (s.back() >= length) {
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < curve.size() && s[i] < length; ++i) pts.push_back(curve[i]);
    pts.push_back(curve.point_at(length));
    return PolylineCurve(std::move(pts));
  }
  std::vector<Vec2> pts = curve.points();
  const Vec2 dir = (curve.back() - curve[curve.size() - 2]).normalized();
  pts.push_back(curve.back() + (length - s.back()) * dir);
  return PolylineCurve(std::move(pts));
}

}  // namespace

WorldState initial_world(const Scenario& scenario) {
  WorldState w;
  w.rope = make_rope(fit_length(scenario.initial, scenario.goal.length()), scenario.nodes,
                     scenario.half_thickness);
  w.rope.segment_length = scenario.goal.length() / static_cast<double>(scenario.nodes - 1);
  w.contacts = scenario.contacts;
  w.workspaces = scenario.workspaces;
  w.sim = scenario.sim;
  relax_in_place(w);
  return w;
}

std::vector<Vec2> detect_world_keypoints(const BinaryImage& image, int m, const WorldImageMap& map) {
  const KeypointSequence raw = detect_with_cleanup(image, m);
  const KeypointSequence fine = finetune_keypoints(raw, image);
  return map.to_world(fine).points;
}

namespace {

std::vector<Vec2> to_image_points(const WorldImageMap& map, const std::vector<Vec2>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(map.to_image(p));
  return out;
}

}  // namespace

EpisodeLog run_episode(const Scenario& scenario) {
  const auto& cfg = scenario.planner;
  double max_radius = 0.0;
  for (const auto& c : scenario.contacts) max_radius = std::max(max_radius, c.radius);
  cfg.validate(max_radius);

  const WorldImageMap map(scenario.roi, scenario.dims);
  const BinaryImage goal_image = rasterize(scenario.goal, scenario.half_thickness, scenario.dims, scenario.roi);
  std::vector<Vec2> goal_kp;
  try {
    goal_kp = detect_world_keypoints(goal_image, scenario.m, map);
  } catch (const Error&) {
    goal_kp = sample_keypoints(scenario.goal, scenario.m, kPi / 4.0).points;
    if (map.to_image(goal_kp.back()).x() < map.to_image(goal_kp.front()).x()) {
      std::reverse(goal_kp.begin(), goal_kp.end());
    }
  }

  EpisodeLog log;
  log.scenario = scenario.name;
  log.seed = scenario.seed;
  log.config = cfg;
  log.contacts = scenario.contacts;
  log.workspaces = scenario.workspaces;
  log.roi = scenario.roi;
  log.dims = scenario.dims;
  log.half_thickness = scenario.half_thickness;
  log.goal = scenario.goal.points();

  const GoalModel goal = make_goal_model(scenario.goal, goal_kp, scenario.contacts, cfg);
  log.goal_keypoints = goal.keypoints;
  log.benchmarks = goal.benchmarks;
  const auto goal_kp_image = to_image_points(map, goal.keypoints);

  WorldState world = initial_world(scenario);
  for (int t = 0;; ++t) {
    StepRecord rec;
    rec.step = t;
    rec.rope = world.rope.nodes;
    rec.stats = world.last_step;
    const BinaryImage obs = observe(world, scenario.roi, scenario.dims);
    rec.iou = iou(obs, goal_image);
    // Termination only needs the observation; a reached goal is not undone by a
    // detector failure on it.
    std::string detect_error;
    try {
      rec.keypoints = align_to_goal(detect_world_keypoints(obs, scenario.m, map), goal.keypoints);
      rec.delta_p = shape_error(to_image_points(map, rec.keypoints), goal_kp_image);
    } catch (const Error& e) {
      detect_error = e.what();
    }
    if (rec.iou > cfg.iou_threshold) {
      log.steps.push_back(std::move(rec));
      log.outcome = Outcome::success;
      return log;
    }
    if (!detect_error.empty()) {
      log.steps.push_back(std::move(rec));
      log.outcome = Outcome::perception_failed;
      log.reason = detect_error;
      return log;
    }
    if (t >= cfg.max_steps) {
      log.steps.push_back(std::move(rec));
      log.outcome = Outcome::step_limit;
      return log;
    }
    try {
      rec.plan = plan_step(world, rec.keypoints, goal, cfg);
    } catch (const Error& e) {
      log.steps.push_back(std::move(rec));
      log.outcome = Outcome::planning_failed;
      log.reason = e.what();
      return log;
    }
    try {
      world = apply_action(world, rec.plan.plan);
    } catch (const Error& e) {
      log.steps.push_back(std::move(rec));
      log.outcome = Outcome::execution_failed;
      log.reason = e.what();
      return log;
    }
    log.steps.push_back(std::move(rec));
  }
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

json pt(const Vec2& p) { return json::array({p.x(), p.y()}); }
Vec2 to_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json pts(const std::vector<Vec2>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back(pt(p));
  return a;
}

std::vector<Vec2> to_pts(const json& j) {
  std::vector<Vec2> out;
  for (const auto& e : j) out.push_back(to_vec(e));
  return out;
}

json opt_index(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }
std::optional<std::size_t> to_opt_index(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

json plan_json(const ActionPlan& plan) {
  json out = json::object();
  for (Arm a : kArms) {
    json steps = json::array();
    for (const auto& step : plan.arm(a)) {
      if (const auto* g = std::get_if<Grasp>(&step)) {
        steps.push_back({{"grasp", g->node}});
      } else if (const auto* mv = std::get_if<MoveTo>(&step)) {
        json path = json::array();
        for (const auto& p : mv->path) path.push_back(json::array({p.position.x(), p.position.y(), p.heading}));
        steps.push_back({{"move", path}});
      } else {
        steps.push_back({{"release", true}});
      }
    }
    out[arm_name(a)] = steps;
  }
  return out;
}

ActionPlan to_plan(const json& j) {
  ActionPlan plan;
  for (Arm a : kArms) {
    for (const auto& s : j.at(arm_name(a))) {
      if (s.contains("grasp")) {
        plan.arm(a).push_back(Grasp{s.at("grasp").get<std::size_t>()});
      } else if (s.contains("move")) {
        MoveTo mv;
        for (const auto& p : s.at("move")) {
          mv.path.push_back({{p.at(0).get<double>(), p.at(1).get<double>()}, p.at(2).get<double>()});
        }
        plan.arm(a).push_back(std::move(mv));
      } else {
        plan.arm(a).push_back(Release{});
      }
    }
  }
  return plan;
}

json config_json(const PlannerConfig& c) {
  return {{"tau_i", c.tau_i},         {"tau_e", c.tau_e},
          {"tau_c", c.tau_c},         {"tau_a", c.tau_a},
          {"tau_b", c.tau_b},         {"iou_threshold", c.iou_threshold},
          {"max_steps", c.max_steps}, {"heading_sign", c.heading_sign},
          {"right_runs_forward", c.right_runs_forward}};
}

PlannerConfig to_config(const json& j) {
  PlannerConfig c;
  c.tau_i = j.at("tau_i");
  c.tau_e = j.at("tau_e");
  c.tau_c = j.at("tau_c");
  c.tau_a = j.at("tau_a");
  c.tau_b = j.at("tau_b");
  c.iou_threshold = j.at("iou_threshold");
  c.max_steps = j.at("max_steps");
  c.heading_sign = j.at("heading_sign");
  c.right_runs_forward = j.at("right_runs_forward");
  return c;
}

json arm_pair(const std::array<std::optional<std::size_t>, 2>& v) {
  return {{"left", opt_index(v[0])}, {"right", opt_index(v[1])}};
}

json target_pair(const std::array<std::optional<Vec2>, 2>& v) {
  json out = json::object();
  for (Arm a : kArms) {
    const auto& t = v[arm_index(a)];
    out[arm_name(a)] = t ? pt(*t) : json(nullptr);
  }
  return out;
}

}  // namespace

std::string episode_jsonl(const EpisodeLog& log) {
  std::ostringstream out;
  json header = {{"type", "header"},
                 {"scenario", log.scenario},
                 {"seed", log.seed},
                 {"config", config_json(log.config)},
                 {"roi", json::array({log.roi.x_min, log.roi.y_min, log.roi.x_max, log.roi.y_max})},
                 {"dims", json::array({log.dims.width, log.dims.height})},
                 {"half_thickness", log.half_thickness}};
  json contacts = json::array();
  for (const auto& c : log.contacts) contacts.push_back({{"center", pt(c.center)}, {"radius", c.radius}});
  header["contacts"] = contacts;
  json ws = json::array();
  for (const auto& w : log.workspaces) {
    ws.push_back({{"center", pt(w.center)}, {"r_inner", w.r_inner}, {"r_outer", w.r_outer}});
  }
  header["workspaces"] = ws;
  header["goal"] = pts(log.goal);
  header["goal_keypoints"] = pts(log.goal_keypoints);
  json bms = json::array();
  for (const auto& cb : log.benchmarks) {
    json b = {{"points", json::array()}, {"extended", json::array()}, {"keypoints", json::array()},
              {"curve_indices", json::array()}, {"sweep", cb.sweep}, {"sweep_first", cb.sweep_first}};
    for (const auto& x : cb.b) {
      b["points"].push_back(pt(x.point));
      b["extended"].push_back(pt(x.extended));
      b["keypoints"].push_back(x.keypoint);
      b["curve_indices"].push_back(x.curve_index);
    }
    bms.push_back(b);
  }
  header["benchmarks"] = bms;
  out << header.dump() << '\n';

  for (const auto& s : log.steps) {
    const auto& p = s.plan;
    json step = {{"type", "step"},
                 {"step", s.step},
                 {"iou", s.iou},
                 {"delta_p", s.delta_p},
                 {"primitive", primitive_name(p.primitive)},
                 {"contact", p.contact ? json(*p.contact + 1) : json(nullptr)},
                 {"mover", p.mover ? json(arm_name(*p.mover)) : json(nullptr)},
                 {"grasp_keypoint", arm_pair(p.grasp.keypoint)},
                 {"grasp_node", arm_pair(p.grasp.node)},
                 {"target", target_pair(p.target)},
                 {"worst", p.worst ? json::array({(*p.worst)[0], (*p.worst)[1]}) : json(nullptr)},
                 {"plan", plan_json(p.plan)},
                 {"stats",
                  {{"substeps", s.stats.substeps},
                   {"relax_iterations", s.stats.relax_iterations},
                   {"unconverged", s.stats.unconverged},
                   {"max_length_drift", s.stats.max_length_drift},
                   {"max_penetration", s.stats.max_penetration},
                   {"stalled", json::array({s.stats.stalled[0], s.stats.stalled[1]})}}},
                 {"keypoints", pts(s.keypoints)},
                 {"rope", pts(s.rope)}};
    out << step.dump() << '\n';
  }

  json result = {{"type", "result"},
                 {"outcome", outcome_name(log.outcome)},
                 {"reason", log.reason},
                 {"actions", log.actions()},
                 {"steps", log.steps.size()}};
  if (!log.steps.empty()) {
    result["initial_iou"] = log.steps.front().iou;
    result["final_iou"] = log.steps.back().iou;
    result["initial_delta_p"] = log.steps.front().delta_p;
    result["final_delta_p"] = log.steps.back().delta_p;
  }
  out << result.dump() << '\n';
  return out.str();
}

namespace {

Outcome to_outcome(const std::string& s) {
  for (Outcome o : {Outcome::success, Outcome::step_limit, Outcome::planning_failed, Outcome::perception_failed,
                    Outcome::execution_failed}) {
    if (s == outcome_name(o)) return o;
  }
  throw FormatError("unknown outcome '" + s + "'", 0);
}

Primitive to_primitive(const std::string& s) {
  for (Primitive p : {Primitive::none, Primitive::contact, Primitive::shape}) {
    if (s == primitive_name(p)) return p;
  }
  throw FormatError("unknown primitive '" + s + "'", 0);
}

}  // namespace

EpisodeLog parse_episode_jsonl(const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  bool have_header = false;
  bool have_result = false;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string type = j.at("type");
      if (type == "header") {
        log.scenario = j.at("scenario");
        log.seed = j.at("seed");
        log.config = to_config(j.at("config"));
        const auto& r = j.at("roi");
        log.roi = {r.at(0), r.at(1), r.at(2), r.at(3)};
        log.dims = {j.at("dims").at(0), j.at("dims").at(1)};
        log.half_thickness = j.at("half_thickness");
        for (const auto& c : j.at("contacts")) log.contacts.push_back({to_vec(c.at("center")), c.at("radius")});
        for (std::size_t i = 0; i < 2; ++i) {
          const auto& w = j.at("workspaces").at(i);
          log.workspaces[i] = {to_vec(w.at("center")), w.at("r_inner"), w.at("r_outer")};
        }
        log.goal = to_pts(j.at("goal"));
        log.goal_keypoints = to_pts(j.at("goal_keypoints"));
        for (const auto& b : j.at("benchmarks")) {
          ContactBenchmarks cb;
          for (std::size_t i = 0; i < 3; ++i) {
            cb.b[i].point = to_vec(b.at("points").at(i));
            cb.b[i].extended = to_vec(b.at("extended").at(i));
            cb.b[i].keypoint = b.at("keypoints").at(i);
            cb.b[i].curve_index = b.at("curve_indices").at(i);
          }
          cb.sweep = b.at("sweep");
          cb.sweep_first = b.at("sweep_first");
          log.benchmarks.push_back(cb);
        }
        have_header = true;
      } else if (type == "step") {
        StepRecord s;
        s.step = j.at("step");
        s.iou = j.at("iou");
        s.delta_p = j.at("delta_p");
        s.plan.primitive = to_primitive(j.at("primitive"));
        if (!j.at("contact").is_null()) s.plan.contact = j.at("contact").get<std::size_t>() - 1;
        if (!j.at("mover").is_null()) s.plan.mover = j.at("mover") == "left" ? Arm::left : Arm::right;
        for (Arm a : kArms) {
          s.plan.grasp.keypoint[arm_index(a)] = to_opt_index(j.at("grasp_keypoint").at(arm_name(a)));
          s.plan.grasp.node[arm_index(a)] = to_opt_index(j.at("grasp_node").at(arm_name(a)));
          const auto& t = j.at("target").at(arm_name(a));
          if (!t.is_null()) s.plan.target[arm_index(a)] = to_vec(t);
        }
        if (!j.at("worst").is_null()) {
          s.plan.worst = std::array<std::size_t, 2>{j.at("worst").at(0), j.at("worst").at(1)};
        }
        s.plan.plan = to_plan(j.at("plan"));
        const auto& st = j.at("stats");
        s.stats.substeps = st.at("substeps");
        s.stats.relax_iterations = st.at("relax_iterations");
        s.stats.unconverged = st.at("unconverged");
        s.stats.max_length_drift = st.at("max_length_drift");
        s.stats.max_penetration = st.at("max_penetration");
        s.stats.stalled = {st.at("stalled").at(0).get<bool>(), st.at("stalled").at(1).get<bool>()};
        s.keypoints = to_pts(j.at("keypoints"));
        s.rope = to_pts(j.at("rope"));
        log.steps.push_back(std::move(s));
      } else if (type == "result") {
        log.outcome = to_outcome(j.at("outcome"));
        log.reason = j.at("reason");
        have_result = true;
      } else {
        throw FormatError("unknown record type '" + type + "'", line_start);
      }
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed episode record: ") + e.what(), line_start);
    }
  }
  if (!have_header) throw FormatError("episode log has no header record", 0);
  if (!have_result) throw FormatError("episode log has no result record", text.size());
  return log;
}

}  // namespace dlo
