#include "dlo/render.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <optional>
#include <string_view>

#include "dlo/error.hpp"

namespace dlo {

SceneFrame frame_from_log(const EpisodeLog& log, std::size_t step) {
  if (step >= log.steps.size()) {
    throw ParameterError(fmt::format("step {} not in log ({} steps recorded)", step, log.steps.size()));
  }
  const auto& s = log.steps[step];
  SceneFrame f;
  f.title = fmt::format("{} seed {} step {}  iou {:.3f}  dP {:.2f}  {}", log.scenario, log.seed, s.step,
                        s.iou, s.delta_p, primitive_name(s.plan.primitive));
  f.roi = log.roi;
  f.dims = log.dims;
  f.half_thickness = log.half_thickness;
  f.goal = log.goal;
  f.rope = s.rope;
  f.keypoints = s.keypoints;
  f.contacts = log.contacts;
  f.benchmarks = log.benchmarks;
  f.plan = s.plan.plan;
  return f;
}

SceneFrame frame_from_scenario(const Scenario& scenario) {
  const WorldState w = initial_world(scenario);
  SceneFrame f;
  f.title = fmt::format("{} seed {} initial", scenario.name, scenario.seed);
  f.roi = scenario.roi;
  f.dims = scenario.dims;
  f.half_thickness = scenario.half_thickness;
  f.goal = scenario.goal.points();
  f.rope = w.rope.nodes;
  f.contacts = scenario.contacts;
  return f;
}

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Canvas {
 public:
  Canvas(const SceneFrame& f, double scale) : map_(f.roi, f.dims), scale_(scale) {}

  Vec2 px(const Vec2& world) const { return map_.to_image(world) * scale_; }
  double len(double world) const { return world * map_.scale_x() * scale_; }

  std::string points(const std::vector<Vec2>& pts) const {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2 p = px(pts[i]);
      out += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", p.x(), p.y());
    }
    return out;
  }

 private:
  WorldImageMap map_;
  double scale_;
};

}  // namespace

std::string render_svg(const SceneFrame& f, double scale) {
  if (!(scale > 0.0)) throw ParameterError("render scale must be positive");
  const Canvas c(f, scale);
  const double w = f.dims.width * scale;
  const double h = f.dims.height * scale;
  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "style=\"background:#ffffff\">\n",
      w, h, w, h);
  s += "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" "
       "orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333333\"/></marker></defs>\n";
  s += fmt::format("<title>{}</title>\n", escape(f.title));

  for (std::size_t k = 0; k < f.contacts.size(); ++k) {
    const Vec2 p = c.px(f.contacts[k].center);
    s += fmt::format(
        "<circle class=\"contact\" data-index=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"#d9d9d9\" "
        "stroke=\"#555555\"/>\n",
        k + 1, p.x(), p.y(), c.len(f.contacts[k].radius));
  }

  if (!f.goal.empty()) {
    std::string d;
    for (std::size_t i = 0; i < f.goal.size(); ++i) {
      const Vec2 p = c.px(f.goal[i]);
      d += fmt::format("{}{}{:.2f},{:.2f}", i ? " " : "", i ? "L" : "M", p.x(), p.y());
    }
    s += fmt::format(
        "<path class=\"goal\" d=\"{}\" fill=\"none\" stroke=\"#2b8a3e\" stroke-width=\"{:.2f}\" "
        "stroke-dasharray=\"6 4\"/>\n",
        d, std::max(1.0, c.len(f.half_thickness) * 0.5));
  }

  for (std::size_t k = 0; k < f.benchmarks.size(); ++k) {
    for (std::size_t b = 0; b < 3; ++b) {
      const Vec2 p = c.px(f.benchmarks[k].b[b].point);
      const double r = 1.2 * scale;
      s += fmt::format(
          "<polygon class=\"benchmark\" data-contact=\"{}\" data-index=\"{}\" "
          "points=\"{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}\" fill=\"#f08c00\"/>\n",
          k + 1, b + 1, p.x(), p.y() - r, p.x() + r, p.y(), p.x(), p.y() + r, p.x() - r, p.y());
    }
  }

  if (!f.rope.empty()) {
    s += fmt::format(
        "<polyline class=\"rope\" points=\"{}\" fill=\"none\" stroke=\"#1c7ed6\" stroke-width=\"{:.2f}\" "
        "stroke-linejoin=\"round\" stroke-linecap=\"round\"/>\n",
        c.points(f.rope), 2.0 * c.len(f.half_thickness));
  }

  const double k_half = 1.0 * scale;
  for (std::size_t i = 0; i < f.keypoints.size(); ++i) {
    const Vec2 p = c.px(f.keypoints[i]);
    s += fmt::format(
        "<rect class=\"keypoint\" data-index=\"{}\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
        "fill=\"{}\"/>\n",
        i + 1, p.x() - k_half, p.y() - k_half, 2 * k_half, 2 * k_half, i == 0 ? "#e03131" : "#212529");
  }

  static constexpr std::array<const char*, 2> kArmColour{"#9c36b5", "#c2255c"};
  for (Arm a : kArms) {
    std::optional<Vec2> from;
    for (const auto& step : f.plan.arm(a)) {
      if (const auto* g = std::get_if<Grasp>(&step)) {
        if (g->node < f.rope.size()) from = f.rope[g->node];
      } else if (const auto* m = std::get_if<MoveTo>(&step)) {
        for (const auto& pose : m->path) {
          if (from) {
            const Vec2 p = c.px(*from);
            const Vec2 q = c.px(pose.position);
            s += fmt::format(
                "<line class=\"plan\" data-arm=\"{}\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                "stroke=\"{}\" stroke-width=\"1.5\" marker-end=\"url(#head)\"/>\n",
                arm_name(a), p.x(), p.y(), q.x(), q.y(), kArmColour[arm_index(a)]);
          }
          from = pose.position;
        }
      }
    }
  }

  s += fmt::format("<text x=\"4\" y=\"14\" font-family=\"monospace\" font-size=\"12\">{}</text>\n", escape(f.title));
  s += "</svg>\n";
  return s;
}

BinaryImage render_mask(const SceneFrame& f) {
  if (f.rope.size() < 2) return BinaryImage(f.dims);
  return rasterize(PolylineCurve(f.rope), f.half_thickness, f.dims, f.roi);
}

}  // namespace dlo
