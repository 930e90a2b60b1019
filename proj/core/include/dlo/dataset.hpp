#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dlo/geometry.hpp"
#include "dlo/raster.hpp"

namespace dlo {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// Synthetic dataset generator settings. Geometry is expressed in roi units; the
/// default roi coincides with the image so one unit is one pixel.
struct GenConfig {
  std::uint64_t seed = 2022;
  int samples = 7040;
  int m = 16;
  ImageDims dims{128, 64};
  Roi roi{0.0, 0.0, 128.0, 64.0};

  IntRange segments{2, 5};
  IntRange harmonics{1, 4};
  /// Peak magnitude of a_n, b_n before the 1/n harmonic roll-off.
  Range coefficient{2.0, 6.0};
  /// Frequency in radians per unit x.
  Range omega{0.4, 1.0};
  /// Extent of each segment along its local x axis.
  Range segment_length{15.0, 40.0};
  int samples_per_segment = 24;
  /// Total arc length of the generated curve after scaling.
  Range curve_length{60.0, 120.0};
  Range half_thickness{0.3, 0.7};

  double tau_u = kPi / 4.0;
  int split_train = 10;
  int split_test = 1;
  int max_retries = 16;

  /// Throws ParameterError when a range is empty or a count is out of bounds.
  void validate() const;
  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

struct SampleMeta {
  std::uint64_t seed = 0;
  float half_thickness_px = 0.0f;
  float curve_length_px = 0.0f;
  std::uint16_t segment_count = 0;
  friend bool operator==(const SampleMeta&, const SampleMeta&) = default;
};

struct LabeledSample {
  BinaryImage image;
  /// Image frame, first point is the end with the smaller u.
  KeypointSequence keypoints;
  SampleMeta meta;
  friend bool operator==(const LabeledSample& a, const LabeledSample& b) {
    return a.image == b.image && a.keypoints.points == b.keypoints.points && a.meta == b.meta;
  }
};

/// Same generator output plus the continuous curve it was drawn from (image frame).
struct GeneratedSample {
  LabeledSample sample;
  PolylineCurve curve_image;
  int retries = 0;
};

/// Deterministic in (config, sample_seed).
GeneratedSample generate_sample_full(const GenConfig& config, std::uint64_t sample_seed);
LabeledSample generate_sample(const GenConfig& config, std::uint64_t sample_seed);

/// Seed of sample `index`; see derive_seed.
std::uint64_t sample_seed(const GenConfig& config, std::size_t index);
/// True when sample `index` belongs to the test split.
bool is_test_index(const GenConfig& config, std::size_t index);

struct DatasetSummary {
  std::size_t train = 0;
  std::size_t test = 0;
  bool skipped = false;
};

/// Manifest text for a config (independent of the generated content).
std::string dataset_manifest(const GenConfig& config);

/// Writes manifest.txt plus train/ and test/ record files. When `out` already holds
/// an identical manifest and all records, nothing is rewritten and `skipped` is set.
DatasetSummary generate_dataset(const GenConfig& config, const std::filesystem::path& out,
                                int jobs = 1);

/// Relative record path of sample `index` (e.g. "test/sample_000010.dlos").
std::string sample_relative_path(const GenConfig& config, std::size_t index);

/// Lists (relative path, is_test) for every manifest entry.
struct ManifestEntry {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool test = false;
  std::string path;
};
std::vector<ManifestEntry> read_manifest_entries(const std::filesystem::path& dataset_dir);

// Record format: see docs/formats.md.
std::vector<std::uint8_t> encode_sample(const LabeledSample& sample);
LabeledSample decode_sample(const std::vector<std::uint8_t>& bytes);
void save_sample(const LabeledSample& sample, const std::filesystem::path& path);
LabeledSample load_sample(const std::filesystem::path& path);

}  // namespace dlo
