#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "dlo/episode.hpp"
#include "helpers.hpp"

#ifdef DLOSHAPE_CLI

namespace dlo {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout captured to a file next to the test's temp directory.
Result run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = std::string("\"") + DLOSHAPE_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = test::slurp(out);
  return r;
}

std::string scenario(const char* name) { return (fs::path(DLOSHAPE_SCENARIO_DIR) / name).string(); }

TEST(Cli, UsageErrorsExitTwo) {
  test::TempDir dir("cli_usage");
  EXPECT_EQ(run("", dir.path()).code, 2);
  EXPECT_EQ(run("frobnicate", dir.path()).code, 2);
  EXPECT_EQ(run("run-episode", dir.path()).code, 2);
  EXPECT_EQ(run("detect --image x.pbm -m 1", dir.path()).code, 2);
  EXPECT_EQ(run("--help", dir.path()).code, 0);
}

TEST(Cli, GenDatasetSplitsAndSkipsIdenticalRerun) {
  test::TempDir dir("cli_gen");
  const auto ds = (dir.path() / "ds").string();
  const auto first = run("gen-dataset --samples 11 --out " + ds, dir.path());
  EXPECT_EQ(first.code, 0);
  EXPECT_NE(first.out.find("11 samples, 10 train / 1 test"), std::string::npos) << first.out;
  const auto manifest = test::slurp(fs::path(ds) / "manifest.txt");
  const auto again = run("gen-dataset --samples 11 --out " + ds, dir.path());
  EXPECT_EQ(again.code, 0);
  EXPECT_NE(again.out.find("skipped"), std::string::npos) << again.out;
  EXPECT_EQ(test::slurp(fs::path(ds) / "manifest.txt"), manifest);

  // The dataset feeds the evaluation commands.
  const auto eval = run("eval-detector --oracle --split all --dataset " + ds, dir.path());
  EXPECT_EQ(eval.code, 0);
  EXPECT_NE(eval.out.find("oracle"), std::string::npos);
  EXPECT_EQ(run("eval-reconstruction --dataset " + ds, dir.path()).code, 0);
  EXPECT_EQ(run("eval-detector --split nope --dataset " + ds, dir.path()).code, 2);
}

TEST(Cli, IoAndFormatErrorsExitThree) {
  test::TempDir dir("cli_io");
  EXPECT_EQ(run("detect --image " + (dir.path() / "missing.pbm").string(), dir.path()).code, 3);
  std::ofstream(dir.path() / "junk.pbm") << "P4\n12 oops\n";
  EXPECT_EQ(run("detect --image " + (dir.path() / "junk.pbm").string(), dir.path()).code, 3);
  EXPECT_EQ(run("eval-detector --dataset " + (dir.path() / "nowhere").string(), dir.path()).code, 3);
}

TEST(Cli, MalformedScenarioExitsTwo) {
  test::TempDir dir("cli_scenario");
  const auto bad = dir.path() / "bad.yaml";
  std::ofstream(bad) << "name: bad\nwobble: 1\n";
  const auto r = run("run-episode --no-frames --out " + (dir.path() / "o").string() + " " + bad.string(),
                     dir.path());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(test::slurp(dir.path() / "stderr.txt").find("line 2"), std::string::npos);
}

TEST(Cli, RunEpisodeWritesLogsAndFrames) {
  test::TempDir dir("cli_episode");
  const auto out = dir.path() / "runs";
  const auto r = run("run-episode --seed 0 --seeds 2 --out " + out.string() + " " + scenario("peg_slalom.yaml"),
                     dir.path());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("2/2 episodes succeeded"), std::string::npos) << r.out;
  for (const char* seed : {"seed_0", "seed_1"}) {
    const auto log_path = out / "peg_slalom" / seed / "episode.jsonl";
    ASSERT_TRUE(fs::exists(log_path));
    const auto log = parse_episode_jsonl(test::slurp(log_path));
    EXPECT_TRUE(log.success());
    std::size_t frames = 0;
    for (const auto& e : fs::directory_iterator(out / "peg_slalom" / seed / "frames")) {
      frames += e.path().extension() == ".svg";
    }
    EXPECT_EQ(frames, log.steps.size());
  }
  const auto first = test::slurp(out / "peg_slalom" / "seed_0" / "episode.jsonl");
  run("run-episode --seed 0 --no-frames --out " + (dir.path() / "again").string() + " " + scenario("peg_slalom.yaml"),
      dir.path());
  EXPECT_EQ(test::slurp(dir.path() / "again" / "peg_slalom" / "seed_0" / "episode.jsonl"), first);
}

TEST(Cli, FailedEpisodeExitsOne) {
  test::TempDir dir("cli_fail");
  const auto r = run("run-episode --no-frames --max-steps 1 --iou-threshold 1 --seed 0 --out " +
                         (dir.path() / "o").string() + " " + scenario("peg_arch.yaml"),
                     dir.path());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("0/1 episodes succeeded"), std::string::npos) << r.out;
}

TEST(Cli, RenderIsByteIdenticalAndChecksStep) {
  test::TempDir dir("cli_render");
  run("run-episode --seed 0 --no-frames --out " + (dir.path() / "o").string() + " " + scenario("peg_slalom.yaml"),
      dir.path());
  const auto log = (dir.path() / "o" / "peg_slalom" / "seed_0" / "episode.jsonl").string();
  const auto a = dir.path() / "a.svg";
  const auto b = dir.path() / "b.svg";
  EXPECT_EQ(run("render --log " + log + " --step 0 --out " + a.string(), dir.path()).code, 0);
  EXPECT_EQ(run("render --log " + log + " --step 0 --out " + b.string(), dir.path()).code, 0);
  EXPECT_EQ(test::slurp(a), test::slurp(b));
  EXPECT_FALSE(test::slurp(a).empty());
  EXPECT_EQ(run("render --log " + log + " --step 99", dir.path()).code, 2);
  EXPECT_EQ(run("render --scenario " + scenario("peg_hook.yaml") + " --out " + (dir.path() / "s.png").string(),
                dir.path())
                .code,
            0);
  EXPECT_TRUE(fs::exists(dir.path() / "s.png"));
}

}  // namespace
}  // namespace dlo

#endif
