#include "dlo/evaluation.hpp"

#include <optional>

#include "dlo/error.hpp"
#include "dlo/parallel.hpp"
#include "dlo/perception.hpp"

namespace dlo {

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  if (name == "all") return Split::all;
  throw ParameterError("unknown split '" + name + "' (expected train, test or all)");
}

std::vector<LabeledSample> load_dataset(const std::filesystem::path& dir, Split split) {
  std::vector<LabeledSample> out;
  for (const auto& e : read_manifest_entries(dir)) {
    if (split == Split::test && !e.test) continue;
    if (split == Split::train && e.test) continue;
    out.push_back(load_sample(dir / e.path));
  }
  return out;
}

DetectorFn geometric_detector(bool finetune) {
  return [finetune](const LabeledSample& s) {
    auto kps = detect_with_cleanup(s.image, static_cast<int>(s.keypoints.size()));
    return finetune ? finetune_keypoints(kps, s.image) : kps;
  };
}

DetectorFn oracle_detector() {
  return [](const LabeledSample& s) { return s.keypoints; };
}

std::size_t off_body_count(const KeypointSequence& kps, const BinaryImage& image) {
  std::size_t n = 0;
  for (const auto& p : kps.points) n += image.at(p) ? 0 : 1;
  return n;
}

std::vector<MetricReport> DetectorEvaluation::reports() const {
  std::vector<MetricReport> r{MetricReport::from(name + ".E_C", corner),
                              MetricReport::from(name + ".E_P", keypoint),
                              MetricReport::from(name + ".off_body", off_body)};
  MetricReport f;
  f.name = name + ".failures";
  f.value = static_cast<double>(failures);
  f.sample_count = samples;
  r.push_back(f);
  return r;
}

DetectorEvaluation evaluate_detector(std::string name, const DetectorFn& detector,
                                     std::span<const LabeledSample> samples, int jobs) {
  std::vector<std::optional<KeypointSequence>> pred(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    try {
      pred[i] = detector(samples[i]);
    } catch (const Error&) {
      pred[i].reset();
    }
  });
  DetectorEvaluation ev;
  ev.name = std::move(name);
  ev.samples = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!pred[i]) {
      ++ev.failures;
      continue;
    }
    ev.corner.add(corner_error(*pred[i], samples[i].keypoints));
    ev.keypoint.add(keypoint_error(*pred[i], samples[i].keypoints));
    ev.off_body.add(static_cast<double>(off_body_count(*pred[i], samples[i].image)));
  }
  return ev;
}

std::vector<MetricReport> ReconstructionEvaluation::reports() const {
  return {MetricReport::from("reconstruction.iou", iou), MetricReport::from("reconstruction.l1", l1)};
}

ReconstructionEvaluation evaluate_reconstruction(std::span<const LabeledSample> samples, int jobs) {
  std::vector<std::pair<double, double>> r(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const auto& s = samples[i];
    const auto rec = reconstruct_from_keypoints(s.keypoints, s.meta.half_thickness_px, s.image.dims());
    r[i] = {iou(rec, s.image), l1_pixel(rec, s.image)};
  });
  ReconstructionEvaluation ev;
  for (const auto& [a, b] : r) {
    ev.iou.add(a);
    ev.l1.add(b);
  }
  return ev;
}

}  // namespace dlo
