#include <benchmark/benchmark.h>

#include <filesystem>

#include "dlo/config_file.hpp"
#include "dlo/dataset.hpp"
#include "dlo/episode.hpp"
#include "dlo/metrics.hpp"
#include "dlo/perception.hpp"
#include "dlo/planner.hpp"

namespace {

using namespace dlo;

Scenario scenario(const char* name, std::uint64_t seed = 0) {
  return instantiate(load_scenario(std::filesystem::path(DLOSHAPE_SCENARIO_DIR) / name), seed);
}

void BM_GenerateSample(benchmark::State& state) {
  const GenConfig cfg;
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_sample(cfg, sample_seed(cfg, i++)));
}
BENCHMARK(BM_GenerateSample);

void BM_Skeletonize(benchmark::State& state) {
  const auto s = generate_sample(GenConfig{}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(skeletonize(s.image));
}
BENCHMARK(BM_Skeletonize);

void BM_DetectWithCleanup(benchmark::State& state) {
  const auto s = generate_sample(GenConfig{}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(detect_with_cleanup(s.image, 16));
}
BENCHMARK(BM_DetectWithCleanup);

void BM_Reconstruct(benchmark::State& state) {
  const auto s = generate_sample(GenConfig{}, 7);
  for (auto _ : state) {
    const auto img = reconstruct_from_keypoints(s.keypoints, s.meta.half_thickness_px, s.image.dims());
    benchmark::DoNotOptimize(iou(img, s.image));
  }
}
BENCHMARK(BM_Reconstruct);

void BM_Chamfer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Vec2> a(n);
  std::vector<Vec2> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = Vec2(std::cos(0.1 * i), std::sin(0.2 * i));
    b[i] = Vec2(std::sin(0.3 * i), std::cos(0.1 * i));
  }
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Chamfer)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_RelaxInitialWorld(benchmark::State& state) {
  const auto s = scenario("peg_zigzag.yaml");
  for (auto _ : state) benchmark::DoNotOptimize(initial_world(s));
}
BENCHMARK(BM_RelaxInitialWorld);

void BM_PlanStep(benchmark::State& state) {
  const auto s = scenario("peg_slalom.yaml");
  const auto world = initial_world(s);
  auto gk = sample_keypoints(s.goal, s.m, kPi / 4.0).points;
  const auto goal = make_goal_model(s.goal, gk, s.contacts, s.planner);
  std::vector<Vec2> kp;
  for (int j = 0; j < s.m; ++j) kp.push_back(world.rope.nodes[static_cast<std::size_t>(63 * j / (s.m - 1))]);
  for (auto _ : state) benchmark::DoNotOptimize(plan_step(world, kp, goal, s.planner));
}
BENCHMARK(BM_PlanStep);

void BM_Episode(benchmark::State& state) {
  const char* names[] = {"peg_arch.yaml", "peg_hook.yaml", "peg_slalom.yaml", "peg_zigzag.yaml"};
  const auto s = scenario(names[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(s));
  state.SetLabel(s.name);
}
BENCHMARK(BM_Episode)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
