// dloshape: dataset generation, detector evaluation, episodes and rendering.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dlo/config_file.hpp"
#include "dlo/dataset.hpp"
#include "dlo/episode.hpp"
#include "dlo/error.hpp"
#include "dlo/evaluation.hpp"
#include "dlo/image_io.hpp"
#include "dlo/parallel.hpp"
#include "dlo/perception.hpp"
#include "dlo/render.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3 };

fs::path output_root() {
  const char* env = std::getenv("DLOSHAPE_OUT");
  return env && *env ? fs::path(env) : fs::path("dloshape-out");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw dlo::IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw dlo::IoError("cannot create " + p.parent_path().string());
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw dlo::IoError("cannot write " + p.string());
  out << text;
  if (!out) throw dlo::IoError("write failed for " + p.string());
}

struct GenArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  int jobs = 1;
};

int cmd_gen_dataset(const GenArgs& a) {
  dlo::GenConfig cfg = a.config.empty() ? dlo::GenConfig{} : dlo::load_gen_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.samples) cfg.samples = *a.samples;
  const fs::path out = a.out.empty() ? output_root() / "dataset" : fs::path(a.out);
  const auto summary = dlo::generate_dataset(cfg, out, a.jobs);
  if (summary.skipped) {
    fmt::print("{}: identical, skipped ({} train / {} test)\n", out.string(), summary.train, summary.test);
  } else {
    fmt::print("{}: {} samples, {} train / {} test\n", out.string(), summary.train + summary.test, summary.train,
               summary.test);
  }
  return kOk;
}

struct DetectArgs {
  std::string image;
  bool finetune = false;
  int m = 16;
  bool json = false;
};

int cmd_detect(const DetectArgs& a) {
  const dlo::BinaryImage img = dlo::load_image(a.image);
  auto kps = dlo::detect_with_cleanup(img, a.m);
  if (a.finetune) kps = dlo::finetune_keypoints(kps, img);
  if (a.json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : kps.points) j.push_back({p.x(), p.y()});
    fmt::print("{}\n", j.dump());
  } else {
    for (std::size_t i = 0; i < kps.size(); ++i) {
      fmt::print("{:>3} {:8.2f} {:8.2f}{}\n", i + 1, kps[i].x(), kps[i].y(), img.at(kps[i]) ? "" : "  off-body");
    }
  }
  return kOk;
}

struct EvalArgs {
  std::string dataset;
  std::string split = "test";
  bool finetune = false;
  bool oracle = false;
  int jobs = 1;
  std::string jsonl;
};

int cmd_eval_detector(const EvalArgs& a) {
  const auto samples = dlo::load_dataset(a.dataset, dlo::parse_split(a.split));
  if (samples.empty()) throw dlo::ParameterError("dataset split '" + a.split + "' is empty");
  std::vector<dlo::DetectorEvaluation> evals;
  if (a.oracle) {
    evals.push_back(dlo::evaluate_detector("oracle", dlo::oracle_detector(), samples, a.jobs));
  } else {
    evals.push_back(dlo::evaluate_detector("geo", dlo::geometric_detector(false), samples, a.jobs));
    if (a.finetune) {
      evals.push_back(dlo::evaluate_detector("geo+finetune", dlo::geometric_detector(true), samples, a.jobs));
    }
  }
  std::vector<dlo::MetricReport> reports;
  fmt::print("{} samples ({} split)\n\n", samples.size(), a.split);
  fmt::print("{:<14} {:>8} {:>10} {:>8} {:>10} {:>9} {:>8}\n", "detector", "mu_C", "var_C", "mu_P", "var_P",
             "off-body", "failed");
  for (const auto& e : evals) {
    fmt::print("{:<14} {:>8.2f} {:>10.2f} {:>8.2f} {:>10.2f} {:>9.3f} {:>8}\n", e.name, e.corner.mean(),
               e.corner.variance(), e.keypoint.mean(), e.keypoint.variance(), e.off_body.mean(), e.failures);
    for (auto& r : e.reports()) reports.push_back(std::move(r));
  }
  if (!a.jsonl.empty()) write_file(a.jsonl, dlo::format_reports_jsonl(reports));
  return kOk;
}

struct ReconArgs {
  std::string dataset;
  std::string split = "test";
  int jobs = 1;
  std::string jsonl;
};

int cmd_eval_reconstruction(const ReconArgs& a) {
  const auto samples = dlo::load_dataset(a.dataset, dlo::parse_split(a.split));
  if (samples.empty()) throw dlo::ParameterError("dataset split '" + a.split + "' is empty");
  const auto reports = dlo::evaluate_reconstruction(samples, a.jobs).reports();
  fmt::print("{}", dlo::format_reports(reports));
  if (!a.jsonl.empty()) write_file(a.jsonl, dlo::format_reports_jsonl(reports));
  return kOk;
}

struct EpisodeArgs {
  std::vector<std::string> scenarios;
  std::string out;
  std::optional<std::uint64_t> seed;
  int seeds = 1;
  int jobs = 1;
  std::optional<int> max_steps;
  std::optional<double> iou_threshold;
  bool no_frames = false;
};

int cmd_run_episode(const EpisodeArgs& a) {
  if (a.seeds < 1) throw dlo::ParameterError("--seeds must be at least 1");
  struct Job {
    dlo::Scenario scenario;
  };
  std::vector<Job> jobs;
  for (const auto& file : a.scenarios) {
    const auto spec = dlo::load_scenario(file);
    const std::uint64_t base = a.seed.value_or(spec.base.seed);
    for (int i = 0; i < a.seeds; ++i) {
      dlo::Scenario sc = dlo::instantiate(spec, base + static_cast<std::uint64_t>(i));
      if (a.max_steps) sc.planner.max_steps = *a.max_steps;
      if (a.iou_threshold) sc.planner.iou_threshold = *a.iou_threshold;
      sc.planner.validate(sc.contacts.empty() ? 0.0 : sc.contacts.front().radius);
      jobs.push_back({std::move(sc)});
    }
  }
  const fs::path root = a.out.empty() ? output_root() / "episodes" : fs::path(a.out);
  std::vector<dlo::EpisodeLog> logs(jobs.size());
  dlo::parallel_for(jobs.size(), a.jobs, [&](std::size_t i) {
    logs[i] = dlo::run_episode(jobs[i].scenario);
    const fs::path dir = root / logs[i].scenario / fmt::format("seed_{}", logs[i].seed);
    write_file(dir / "episode.jsonl", dlo::episode_jsonl(logs[i]));
    if (!a.no_frames) {
      for (std::size_t s = 0; s < logs[i].steps.size(); ++s) {
        write_file(dir / "frames" / fmt::format("step_{:03d}.svg", s),
                   dlo::render_svg(dlo::frame_from_log(logs[i], s)));
      }
    }
  });
  int ok = 0;
  for (const auto& log : logs) {
    ok += log.success() ? 1 : 0;
    const auto& first = log.steps.front();
    const auto& last = log.steps.back();
    // A step without keypoints (perception failure) has no shape error.
    const std::string dp_end = last.keypoints.empty() ? "-" : fmt::format("{:.2f}", last.delta_p);
    fmt::print("{} seed {}: {}{} after {} actions, iou {:.3f} -> {:.3f}, dP {:.2f} -> {} px\n", log.scenario,
               log.seed, dlo::outcome_name(log.outcome), log.reason.empty() ? "" : " (" + log.reason + ")",
               log.actions(), first.iou, last.iou, first.delta_p, dp_end);
  }
  fmt::print("{}/{} episodes succeeded; logs under {}\n", ok, logs.size(), root.string());
  return ok == static_cast<int>(logs.size()) ? kOk : kFailure;
}

struct RenderArgs {
  std::string log;
  std::string scenario;
  std::optional<std::size_t> step;
  std::optional<std::uint64_t> seed;
  std::string out;
  double scale = 6.0;
};

int cmd_render(const RenderArgs& a) {
  dlo::SceneFrame frame;
  if (!a.log.empty()) {
    const auto log = dlo::parse_episode_jsonl(read_file(a.log));
    frame = dlo::frame_from_log(log, a.step.value_or(log.steps.empty() ? 0 : log.steps.size() - 1));
  } else {
    const auto spec = dlo::load_scenario(a.scenario);
    frame = dlo::frame_from_scenario(dlo::instantiate(spec, a.seed));
  }
  if (a.out.empty()) {
    fmt::print("{}", dlo::render_svg(frame, a.scale));
    return kOk;
  }
  const fs::path out(a.out);
  if (out.extension() == ".png") {
    dlo::write_png(dlo::render_mask(frame), out);
  } else if (out.extension() == ".pbm") {
    dlo::write_pbm(dlo::render_mask(frame), out);
  } else {
    write_file(out, dlo::render_svg(frame, a.scale));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planning and perception toolkit for shaping a rope around pegs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dloshape 0.1.0");

  GenArgs gen;
  auto* g = app.add_subcommand("gen-dataset", "Generate a labelled synthetic dataset");
  g->add_option("--config", gen.config, "Generator config (YAML)")->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Output directory (default $DLOSHAPE_OUT/dataset)");
  g->add_option("--seed", gen.seed, "Override the master seed");
  g->add_option("--samples", gen.samples, "Override the sample count");
  g->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "Detect keypoints in an image (.pbm, .png or .dlos)");
  d->add_option("--image", det.image, "Input image")->required();
  d->add_flag("--finetune", det.finetune, "Move off-body keypoints onto the shape");
  d->add_option("-m,--keypoints", det.m, "Number of keypoints")->check(CLI::Range(2, 4096));
  d->add_flag("--json", det.json, "Print a JSON array of [u, v]");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval-detector", "Keypoint detection errors on a dataset split");
  e->add_option("--dataset", ev.dataset, "Dataset directory")->required();
  e->add_option("--split", ev.split, "train, test or all");
  e->add_flag("--finetune", ev.finetune, "Also report the finetuned detector");
  e->add_flag("--oracle", ev.oracle, "Pass ground-truth labels through instead of detecting");
  e->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);
  e->add_option("--jsonl", ev.jsonl, "Also write machine-readable reports here");

  ReconArgs rc;
  auto* r = app.add_subcommand("eval-reconstruction", "IoU and L1 of label reconstructions on a dataset split");
  r->add_option("--dataset", rc.dataset, "Dataset directory")->required();
  r->add_option("--split", rc.split, "train, test or all");
  r->add_option("--jobs", rc.jobs, "Worker threads")->check(CLI::PositiveNumber);
  r->add_option("--jsonl", rc.jsonl, "Also write machine-readable reports here");

  EpisodeArgs ep;
  auto* x = app.add_subcommand("run-episode", "Run the planner on one or more scenario files");
  x->add_option("scenario", ep.scenarios, "Scenario files (YAML)")->required();
  x->add_option("--out", ep.out, "Output directory (default $DLOSHAPE_OUT/episodes)");
  x->add_option("--seed", ep.seed, "First placement seed (default: the file's seed)");
  x->add_option("--seeds", ep.seeds, "Number of consecutive seeds per scenario");
  x->add_option("--jobs", ep.jobs, "Worker threads")->check(CLI::PositiveNumber);
  x->add_option("--max-steps", ep.max_steps, "Maximum number of primitives")->check(CLI::PositiveNumber);
  x->add_option("--iou-threshold", ep.iou_threshold, "Success IoU")->check(CLI::Range(0.0, 1.0));
  x->add_flag("--no-frames", ep.no_frames, "Skip the per-step SVG frames");

  RenderArgs rn;
  auto* v = app.add_subcommand("render", "Render a logged step or a scenario's initial state");
  auto* src = v->add_option("--log", rn.log, "episode.jsonl")->check(CLI::ExistingFile);
  v->add_option("--scenario", rn.scenario, "Scenario file")->excludes(src);
  v->add_option("--step", rn.step, "Step index in the log (default: last)");
  v->add_option("--seed", rn.seed, "Placement seed for --scenario");
  v->add_option("--out", rn.out, "Output .svg, .png or .pbm (default: SVG on stdout)");
  v->add_option("--scale", rn.scale, "Output pixels per image pixel")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gen_dataset(gen);
    if (*d) return cmd_detect(det);
    if (*e) return cmd_eval_detector(ev);
    if (*r) return cmd_eval_reconstruction(rc);
    if (*x) return cmd_run_episode(ep);
    if (*v) {
      if (rn.log.empty() && rn.scenario.empty()) throw dlo::ParameterError("render needs --log or --scenario");
      return cmd_render(rn);
    }
  } catch (const dlo::ParameterError& err) {
    fmt::print(stderr, "error: {}\n", err.what());
    return kUsage;
  } catch (const dlo::IoError& err) {
    fmt::print(stderr, "error: {}\n", err.what());
    return kIo;
  } catch (const dlo::FormatError& err) {
    fmt::print(stderr, "error: {}\n", err.what());
    return kIo;
  } catch (const dlo::Error& err) {
    fmt::print(stderr, "error: {}\n", err.what());
    return kFailure;
  }
  return kUsage;
}
