#include <gtest/gtest.h>

#include "dlo/dataset.hpp"
#include "dlo/error.hpp"
#include "dlo/evaluation.hpp"
#include "helpers.hpp"

namespace dlo {
namespace {

GenConfig small_config() {
  GenConfig c;
  c.samples = 44;
  c.seed = 17;
  return c;
}

TEST(Evaluation, LoadDatasetRespectsSplitAndOrder) {
  test::TempDir dir("eval_load");
  const auto cfg = small_config();
  generate_dataset(cfg, dir.path(), 2);
  const auto all = load_dataset(dir.path(), Split::all);
  const auto train = load_dataset(dir.path(), Split::train);
  const auto test = load_dataset(dir.path(), Split::test);
  EXPECT_EQ(all.size(), 44u);
  EXPECT_EQ(train.size(), 40u);
  EXPECT_EQ(test.size(), 4u);
  // Records store keypoints as float32.
  EXPECT_EQ(encode_sample(test[0]), encode_sample(generate_sample(cfg, sample_seed(cfg, 10))));
  EXPECT_EQ(encode_sample(train[10]), encode_sample(generate_sample(cfg, sample_seed(cfg, 11))));
  EXPECT_THROW(parse_split("validation"), ParameterError);
  EXPECT_THROW(load_dataset(dir.path() / "missing", Split::all), IoError);
}

TEST(Evaluation, OracleDetectorHasZeroError) {
  const auto cfg = small_config();
  std::vector<LabeledSample> samples;
  for (std::size_t i = 0; i < 12; ++i) samples.push_back(generate_sample(cfg, sample_seed(cfg, i)));
  const auto e = evaluate_detector("oracle", oracle_detector(), samples);
  EXPECT_EQ(e.samples, 12u);
  EXPECT_EQ(e.failures, 0u);
  EXPECT_EQ(e.corner.mean(), 0.0);
  EXPECT_EQ(e.keypoint.mean(), 0.0);
}

TEST(Evaluation, ResultIndependentOfJobs) {
  const auto cfg = small_config();
  std::vector<LabeledSample> samples;
  for (std::size_t i = 0; i < 30; ++i) samples.push_back(generate_sample(cfg, sample_seed(cfg, i)));
  const auto a = evaluate_detector("geo", geometric_detector(true), samples, 1);
  const auto b = evaluate_detector("geo", geometric_detector(true), samples, 4);
  EXPECT_EQ(a.failures, b.failures);
  EXPECT_EQ(a.corner.mean(), b.corner.mean());
  EXPECT_EQ(a.keypoint.variance(), b.keypoint.variance());
  EXPECT_EQ(a.corner.count() + a.failures, samples.size());
  // Finetuned keypoints always sit on the body.
  EXPECT_EQ(a.off_body.mean(), 0.0);
  const auto r1 = evaluate_reconstruction(samples, 1);
  const auto r4 = evaluate_reconstruction(samples, 3);
  EXPECT_EQ(r1.iou.mean(), r4.iou.mean());
  EXPECT_EQ(r1.l1.mean(), r4.l1.mean());
}

TEST(Evaluation, FailuresAreCountedNotThrown) {
  const auto cfg = small_config();
  std::vector<LabeledSample> samples{generate_sample(cfg, 1), generate_sample(cfg, 2)};
  samples[1].image = BinaryImage(cfg.dims.width, cfg.dims.height);
  const auto e = evaluate_detector("geo", geometric_detector(false), samples);
  EXPECT_EQ(e.failures, 1u);
  EXPECT_EQ(e.keypoint.count(), 1u);
}

TEST(Evaluation, OffBodyCountOracle) {
  const auto img = test::band(20, 10, 4, 5);
  KeypointSequence k{{{0.5, 4.5}, {3.2, 5.9}, {3.0, 6.0}, {10.0, 0.5}, {-1.0, 4.5}}, Frame::image};
  EXPECT_EQ(off_body_count(k, img), 3u);
}

}  // namespace
}  // namespace dlo
