#include "dlo/config_file.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "dlo/error.hpp"
#include "dlo/image_io.hpp"
#include "dlo/perception.hpp"
#include "dlo/rng.hpp"

namespace dlo {

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  const auto mark = n.Mark();
  if (mark.line < 0) throw ParameterError(msg);
  throw ParameterError(fmt::format("line {}, column {}: {}", mark.line + 1, mark.column + 1, msg));
}

void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!map.IsMap()) fail(map, fmt::format("{} must be a mapping", where));
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

template <typename T>
T as(const YAML::Node& n, const char* what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, fmt::format("invalid value for {}", what));
  }
}

std::vector<double> numbers(const YAML::Node& n, std::size_t count, const char* what) {
  if (!n.IsSequence() || n.size() != count) fail(n, fmt::format("{} must be a list of {} numbers", what, count));
  std::vector<double> out;
  for (const auto& e : n) out.push_back(as<double>(e, what));
  return out;
}

Vec2 vec(const YAML::Node& n, const char* what) {
  const auto v = numbers(n, 2, what);
  return {v[0], v[1]};
}

Range range(const YAML::Node& n, const char* what) {
  const auto v = numbers(n, 2, what);
  return {v[0], v[1]};
}

IntRange int_range(const YAML::Node& n, const char* what) {
  if (!n.IsSequence() || n.size() != 2) fail(n, fmt::format("{} must be a list of 2 integers", what));
  return {as<int>(n[0], what), as<int>(n[1], what)};
}

YAML::Node parse_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParameterError(fmt::format("line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1, e.msg));
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

GenConfig parse_gen_config(const std::string& text) {
  const YAML::Node root = parse_yaml(text);
  GenConfig c;
  if (root.IsNull()) return c;
  check_keys(root,
             {"seed", "samples", "m", "image", "roi", "segments", "harmonics", "coefficient", "omega",
              "segment_length", "samples_per_segment", "curve_length", "half_thickness", "tau_u", "split",
              "max_retries"},
             "dataset config");
  if (root["seed"]) c.seed = as<std::uint64_t>(root["seed"], "seed");
  if (root["samples"]) c.samples = as<int>(root["samples"], "samples");
  if (root["m"]) c.m = as<int>(root["m"], "m");
  if (root["image"]) {
    const auto d = int_range(root["image"], "image");
    c.dims = {d.lo, d.hi};
  }
  if (root["roi"]) {
    const auto r = numbers(root["roi"], 4, "roi");
    c.roi = {r[0], r[1], r[2], r[3]};
  }
  if (root["segments"]) c.segments = int_range(root["segments"], "segments");
  if (root["harmonics"]) c.harmonics = int_range(root["harmonics"], "harmonics");
  if (root["coefficient"]) c.coefficient = range(root["coefficient"], "coefficient");
  if (root["omega"]) c.omega = range(root["omega"], "omega");
  if (root["segment_length"]) c.segment_length = range(root["segment_length"], "segment_length");
  if (root["samples_per_segment"]) c.samples_per_segment = as<int>(root["samples_per_segment"], "samples_per_segment");
  if (root["curve_length"]) c.curve_length = range(root["curve_length"], "curve_length");
  if (root["half_thickness"]) c.half_thickness = range(root["half_thickness"], "half_thickness");
  if (root["tau_u"]) c.tau_u = as<double>(root["tau_u"], "tau_u");
  if (root["split"]) {
    const auto s = int_range(root["split"], "split");
    c.split_train = s.lo;
    c.split_test = s.hi;
  }
  if (root["max_retries"]) c.max_retries = as<int>(root["max_retries"], "max_retries");
  c.validate();
  return c;
}

GenConfig load_gen_config(const std::filesystem::path& path) { return parse_gen_config(read_text(path)); }

namespace {

CurveSpec parse_curve(const YAML::Node& n, const std::filesystem::path& base_dir, bool allow_image,
                      const char* where) {
  if (!n || !n.IsMap() || n.size() != 1) fail(n, fmt::format("{} needs exactly one of points, turtle, fourier{}", where, allow_image ? ", image" : ""));
  if (n["points"]) {
    const auto& p = n["points"];
    if (!p.IsSequence() || p.size() < 2) fail(p, "points needs at least two entries");
    std::vector<Vec2> pts;
    for (const auto& e : p) pts.push_back(vec(e, "point"));
    return pts;
  }
  if (n["turtle"]) {
    const auto& t = n["turtle"];
    check_keys(t, {"start", "heading_deg", "steps"}, "turtle");
    TurtleSpec spec;
    if (t["start"]) spec.start = vec(t["start"], "start");
    if (t["heading_deg"]) spec.heading_deg = as<double>(t["heading_deg"], "heading_deg");
    if (!t["steps"] || !t["steps"].IsSequence()) fail(t, "turtle needs a steps list");
    for (const auto& s : t["steps"]) {
      check_keys(s, {"straight", "arc"}, "turtle step");
      TurtleStep step;
      if (s["straight"]) {
        step.length = as<double>(s["straight"], "straight");
        if (!(step.length > 0.0)) fail(s["straight"], "straight length must be positive");
      } else if (s["arc"]) {
        check_keys(s["arc"], {"radius", "angle_deg"}, "arc");
        step.arc = true;
        step.radius = as<double>(s["arc"]["radius"], "radius");
        step.angle_deg = as<double>(s["arc"]["angle_deg"], "angle_deg");
        if (!(step.radius > 0.0)) fail(s["arc"], "arc radius must be positive");
      } else {
        fail(s, "turtle step needs straight or arc");
      }
      spec.steps.push_back(step);
    }
    if (spec.steps.empty()) fail(t, "turtle needs at least one step");
    return spec;
  }
  if (n["fourier"]) {
    const auto& f = n["fourier"];
    check_keys(f, {"segments", "origin", "rotation_deg", "length"}, "fourier");
    FourierSpec spec;
    if (f["origin"]) spec.origin = vec(f["origin"], "origin");
    if (f["rotation_deg"]) spec.rotation_deg = as<double>(f["rotation_deg"], "rotation_deg");
    if (f["length"]) spec.length = as<double>(f["length"], "length");
    if (!f["segments"] || !f["segments"].IsSequence()) fail(f, "fourier needs a segments list");
    for (const auto& s : f["segments"]) {
      check_keys(s, {"a0", "harmonics", "omega", "x_span", "samples"}, "fourier segment");
      FourierSegment seg;
      if (s["a0"]) seg.a0 = as<double>(s["a0"], "a0");
      if (s["harmonics"]) {
        for (const auto& h : s["harmonics"]) {
          const auto ab = numbers(h, 2, "harmonic");
          seg.harmonics.push_back({ab[0], ab[1]});
        }
      }
      if (s["omega"]) seg.omega = as<double>(s["omega"], "omega");
      if (s["x_span"]) {
        const auto r = range(s["x_span"], "x_span");
        seg.x_min = r.lo;
        seg.x_max = r.hi;
      }
      if (s["samples"]) seg.sample_count = as<int>(s["samples"], "samples");
      spec.segments.push_back(seg);
    }
    return spec;
  }
  if (n["image"]) {
    if (!allow_image) fail(n, fmt::format("{} cannot be an image", where));
    std::filesystem::path p = as<std::string>(n["image"], "image");
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) fail(n["image"], fmt::format("goal image '{}' does not exist", p.string()));
    return ImageCurveSpec{p};
  }
  fail(n, fmt::format("{} needs exactly one of points, turtle, fourier{}", where, allow_image ? ", image" : ""));
}

PolylineCurve turtle_curve(const TurtleSpec& t) {
  constexpr double kStep = 0.002;
  std::vector<Vec2> pts{t.start};
  Vec2 pos = t.start;
  double heading = t.heading_deg * kPi / 180.0;
  for (const auto& s : t.steps) {
    if (!s.arc) {
      const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(s.length / kStep)));
      const Vec2 dir(std::cos(heading), std::sin(heading));
      const Vec2 from = pos;
      for (std::size_t k = 1; k <= pieces; ++k) {
        pos = from + s.length * static_cast<double>(k) / static_cast<double>(pieces) * dir;
        pts.push_back(pos);
      }
      continue;
    }
    const double sweep = s.angle_deg * kPi / 180.0;
    const double side = sweep >= 0.0 ? 1.0 : -1.0;
    const Vec2 center = pos + side * s.radius * Vec2(-std::sin(heading), std::cos(heading));
    const double a0 = std::atan2(pos.y() - center.y(), pos.x() - center.x());
    const auto pieces =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(sweep) * s.radius / kStep)));
    for (std::size_t k = 1; k <= pieces; ++k) {
      const double a = a0 + sweep * static_cast<double>(k) / static_cast<double>(pieces);
      pos = center + s.radius * Vec2(std::cos(a), std::sin(a));
      pts.push_back(pos);
    }
    heading += sweep;
  }
  return PolylineCurve(std::move(pts));
}

PolylineCurve fourier_curve(const FourierSpec& f) {
  if (f.segments.empty()) throw ParameterError("fourier curve needs at least one segment");
  std::vector<PolylineCurve> pieces;
  for (const auto& s : f.segments) pieces.push_back(fourier_segment(s));
  PolylineCurve c = concatenate_segments(pieces);
  const Vec2 first = c.front();
  const double scale = f.length > 0.0 ? f.length / c.length() : 1.0;
  const double rot = f.rotation_deg * kPi / 180.0;
  const Eigen::Rotation2Dd r(rot);
  std::vector<Vec2> pts;
  for (const auto& p : c.points()) pts.push_back(f.origin + r * (scale * (p - first)));
  return PolylineCurve(std::move(pts));
}

PolylineCurve image_curve(const ImageCurveSpec& spec, const Roi& roi) {
  const BinaryImage img = load_image(spec.path);
  const WorldImageMap map(roi, img.dims());
  const auto order = order_skeleton(prune_spurs(skeletonize(img)));
  std::vector<Vec2> pts;
  for (const auto& p : order) pts.push_back(map.to_world(Vec2(p.u + 0.5, p.v + 0.5)));
  if (pts.size() < 2) throw ParameterError("goal image skeleton is too small");
  return PolylineCurve(std::move(pts));
}

}  // namespace

PolylineCurve build_curve(const CurveSpec& spec, const Roi& roi) {
  return std::visit(
      [&](const auto& s) -> PolylineCurve {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, std::vector<Vec2>>) {
          return PolylineCurve(s);
        } else if constexpr (std::is_same_v<T, TurtleSpec>) {
          return turtle_curve(s);
        } else if constexpr (std::is_same_v<T, FourierSpec>) {
          return fourier_curve(s);
        } else {
          return image_curve(s, roi);
        }
      },
      spec);
}

ScenarioSpec parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  const YAML::Node root = parse_yaml(text);
  if (!root.IsMap()) throw ParameterError("scenario must be a mapping");
  check_keys(root,
             {"name", "seed", "roi", "image", "keypoints", "rope", "goal", "contacts", "workspaces", "planner", "sim"},
             "scenario");
  ScenarioSpec spec;
  Scenario& s = spec.base;
  if (root["name"]) s.name = as<std::string>(root["name"], "name");
  if (root["seed"]) s.seed = as<std::uint64_t>(root["seed"], "seed");
  if (root["roi"]) {
    const auto r = numbers(root["roi"], 4, "roi");
    s.roi = {r[0], r[1], r[2], r[3]};
    if (!(s.roi.width() > 0.0 && s.roi.height() > 0.0)) fail(root["roi"], "roi must have positive area");
  }
  if (root["image"]) {
    const auto d = int_range(root["image"], "image");
    if (d.lo <= 0 || d.hi <= 0) fail(root["image"], "image dimensions must be positive");
    s.dims = {d.lo, d.hi};
  }
  if (root["keypoints"]) {
    s.m = as<int>(root["keypoints"], "keypoints");
    if (s.m < 3) fail(root["keypoints"], "keypoints must be at least 3");
  }

  if (!root["rope"]) fail(root, "scenario needs a rope section");
  const auto& rope = root["rope"];
  check_keys(rope, {"nodes", "half_thickness", "initial", "jitter"}, "rope");
  if (rope["nodes"]) {
    const int n = as<int>(rope["nodes"], "nodes");
    if (n < 16) fail(rope["nodes"], "rope needs at least 16 nodes");
    s.nodes = static_cast<std::size_t>(n);
  }
  if (rope["half_thickness"]) {
    s.half_thickness = as<double>(rope["half_thickness"], "half_thickness");
    if (!(s.half_thickness > 0.0)) fail(rope["half_thickness"], "half_thickness must be positive");
  }
  if (!rope["initial"]) fail(rope, "rope needs an initial curve");
  spec.initial = parse_curve(rope["initial"], base_dir, false, "rope.initial");
  if (rope["jitter"]) {
    check_keys(rope["jitter"], {"translation", "rotation_deg"}, "rope.jitter");
    if (rope["jitter"]["translation"]) spec.jitter_translation = as<double>(rope["jitter"]["translation"], "translation");
    if (rope["jitter"]["rotation_deg"]) {
      spec.jitter_rotation_deg = as<double>(rope["jitter"]["rotation_deg"], "rotation_deg");
    }
  }

  if (!root["goal"]) fail(root, "scenario needs a goal curve");
  spec.goal = parse_curve(root["goal"], base_dir, true, "goal");

  if (!root["contacts"] || !root["contacts"].IsSequence()) fail(root, "scenario needs a contacts list");
  for (const auto& c : root["contacts"]) {
    check_keys(c, {"center", "radius"}, "contact");
    Contact contact;
    contact.center = vec(c["center"], "center");
    if (c["radius"]) contact.radius = as<double>(c["radius"], "radius");
    if (!(contact.radius > 0.0)) fail(c, "contact radius must be positive");
    const Vec2 p = contact.center;
    if (p.x() < s.roi.x_min || p.x() > s.roi.x_max || p.y() < s.roi.y_min || p.y() > s.roi.y_max) {
      fail(c, "contact centre lies outside the roi");
    }
    s.contacts.push_back(contact);
  }
  if (s.contacts.empty()) fail(root["contacts"], "scenario needs at least one contact");

  if (root["workspaces"]) {
    const auto& w = root["workspaces"];
    check_keys(w, {"left", "right"}, "workspaces");
    for (Arm a : kArms) {
      const auto& n = w[arm_name(a)];
      if (!n) continue;
      check_keys(n, {"center", "r_inner", "r_outer"}, "workspace");
      Workspace& ws = s.workspaces[arm_index(a)];
      if (n["center"]) ws.center = vec(n["center"], "center");
      if (n["r_inner"]) ws.r_inner = as<double>(n["r_inner"], "r_inner");
      if (n["r_outer"]) ws.r_outer = as<double>(n["r_outer"], "r_outer");
      if (!(ws.r_inner > 0.0 && ws.r_inner < ws.r_outer)) fail(n, "workspace needs 0 < r_inner < r_outer");
    }
  }

  if (root["planner"]) {
    const auto& p = root["planner"];
    check_keys(p,
               {"tau_i", "tau_e", "tau_c", "tau_a_deg", "tau_b", "iou_threshold", "max_steps", "heading_sign",
                "right_runs_forward"},
               "planner");
    auto& c = s.planner;
    auto take = [&](const char* key, auto& field) {
      if (!p[key]) return;
      field = as<std::decay_t<decltype(field)>>(p[key], key);
      spec.planner_overrides.emplace_back(key);
    };
    take("tau_i", c.tau_i);
    take("tau_e", c.tau_e);
    take("tau_c", c.tau_c);
    take("tau_b", c.tau_b);
    take("iou_threshold", c.iou_threshold);
    take("max_steps", c.max_steps);
    take("heading_sign", c.heading_sign);
    take("right_runs_forward", c.right_runs_forward);
    if (p["tau_a_deg"]) {
      c.tau_a = as<double>(p["tau_a_deg"], "tau_a_deg") * kPi / 180.0;
      spec.planner_overrides.emplace_back("tau_a");
    }
  }
  if (root["sim"]) {
    const auto& m = root["sim"];
    check_keys(m, {"max_iterations", "tolerance", "clearance", "bend_limit_deg", "stall_drift"}, "sim");
    auto& c = s.sim;
    if (m["max_iterations"]) c.max_iterations = as<int>(m["max_iterations"], "max_iterations");
    if (m["tolerance"]) c.tolerance = as<double>(m["tolerance"], "tolerance");
    if (m["clearance"]) c.clearance = as<double>(m["clearance"], "clearance");
    if (m["bend_limit_deg"]) c.bend_limit = as<double>(m["bend_limit_deg"], "bend_limit_deg") * kPi / 180.0;
    if (m["stall_drift"]) c.stall_drift = as<double>(m["stall_drift"], "stall_drift");
  }
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text(path), path.parent_path());
}

Scenario instantiate(const ScenarioSpec& spec, std::optional<std::uint64_t> seed) {
  Scenario s = spec.base;
  if (seed) s.seed = *seed;
  s.goal = build_curve(spec.goal, s.roi).densified(0.002);

  // Contacts are indexed along the goal curve.
  std::vector<std::pair<std::size_t, Contact>> keyed;
  for (const auto& c : s.contacts) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.goal.size(); ++i) {
      const double d = (s.goal[i] - c.center).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    keyed.emplace_back(best, c);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < keyed.size(); ++k) s.contacts[k] = keyed[k].second;

  double radius = 0.0;
  for (const auto& c : s.contacts) radius = std::max(radius, c.radius);
  PlannerConfig cfg = PlannerConfig::defaults(radius, s.half_thickness);
  const auto& o = spec.planner_overrides;
  auto has = [&](const char* key) { return std::find(o.begin(), o.end(), key) != o.end(); };
  const auto& p = spec.base.planner;
  if (has("tau_i")) cfg.tau_i = p.tau_i;
  if (has("tau_e")) cfg.tau_e = p.tau_e;
  cfg.tau_c = has("tau_c") ? p.tau_c : cfg.tau_e;
  if (has("tau_a")) cfg.tau_a = p.tau_a;
  if (has("tau_b")) cfg.tau_b = p.tau_b;
  if (has("iou_threshold")) cfg.iou_threshold = p.iou_threshold;
  if (has("max_steps")) cfg.max_steps = p.max_steps;
  if (has("heading_sign")) cfg.heading_sign = p.heading_sign;
  if (has("right_runs_forward")) cfg.right_runs_forward = p.right_runs_forward;
  cfg.validate(radius);
  s.planner = cfg;

  PolylineCurve initial = build_curve(spec.initial, s.roi);
  if (spec.jitter_translation > 0.0 || spec.jitter_rotation_deg > 0.0) {
    Rng rng(derive_seed(s.seed, 0x6a177e5ULL));
    const double r = spec.jitter_translation * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, 2.0 * kPi);
    const double rot = rng.uniform(-1.0, 1.0) * spec.jitter_rotation_deg * kPi / 180.0;
    initial = transform_curve(initial, Vec2(r * std::cos(a), r * std::sin(a)), rot);
  }
  s.initial = initial;
  return s;
}

}  // namespace dlo
