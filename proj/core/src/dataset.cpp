#include "dlo/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "dlo/error.hpp"
#include "dlo/rng.hpp"

namespace dlo {

namespace {

constexpr std::uint16_t kRecordVersion = 1;
constexpr std::uint16_t kByteOrderMark = 0xFEFF;
constexpr std::size_t kHeaderSize = 32;

void require_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw ParameterError(fmt::format("range {} is empty", name));
  }
}

void require_range(const IntRange& r, const char* name) {
  if (r.lo > r.hi) throw ParameterError(fmt::format("range {} is empty", name));
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void GenConfig::validate() const {
  if (samples < 1) throw ParameterError("samples must be >= 1");
  if (m < 2) throw ParameterError("m must be >= 2");
  if (dims.width <= 0 || dims.height <= 0 || dims.width > 65535 || dims.height > 65535) {
    throw ParameterError("image dimensions out of range");
  }
  if (!(roi.width() > 0.0) || !(roi.height() > 0.0)) throw ParameterError("roi must have positive area");
  require_range(segments, "segments");
  require_range(harmonics, "harmonics");
  require_range(coefficient, "coefficient");
  require_range(omega, "omega");
  require_range(segment_length, "segment_length");
  require_range(curve_length, "curve_length");
  require_range(half_thickness, "half_thickness");
  if (segments.lo < 1) throw ParameterError("segments must be >= 1");
  if (harmonics.lo < 0) throw ParameterError("harmonics must be >= 0");
  if (!(segment_length.lo > 0.0)) throw ParameterError("segment_length must be positive");
  if (!(curve_length.lo > 0.0)) throw ParameterError("curve_length must be positive");
  if (half_thickness.lo < 0.0) throw ParameterError("half_thickness must be non-negative");
  if (samples_per_segment < 2) throw ParameterError("samples_per_segment must be >= 2");
  if (split_train < 0 || split_test < 0 || split_train + split_test == 0) {
    throw ParameterError("split ratio must be non-negative and not 0:0");
  }
  if (max_retries < 0) throw ParameterError("max_retries must be >= 0");
}

std::uint64_t sample_seed(const GenConfig& config, std::size_t index) {
  return derive_seed(config.seed, index);
}

bool is_test_index(const GenConfig& config, std::size_t index) {
  const auto period = static_cast<std::size_t>(config.split_train + config.split_test);
  return index % period >= static_cast<std::size_t>(config.split_train);
}

namespace {

std::optional<GeneratedSample> try_generate(const GenConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const int nseg = rng.uniform_int(cfg.segments.lo, cfg.segments.hi);
  std::vector<PolylineCurve> pieces;
  pieces.reserve(static_cast<std::size_t>(nseg));
  for (int k = 0; k < nseg; ++k) {
    FourierSegment seg;
    const int harmonics = rng.uniform_int(cfg.harmonics.lo, cfg.harmonics.hi);
    const double amplitude = rng.uniform(cfg.coefficient.lo, cfg.coefficient.hi);
    seg.omega = rng.uniform(cfg.omega.lo, cfg.omega.hi);
    seg.a0 = rng.uniform(-amplitude, amplitude);
    for (int n = 1; n <= harmonics; ++n) {
      const double a = rng.uniform(-amplitude, amplitude) / n;
      const double b = rng.uniform(-amplitude, amplitude) / n;
      seg.harmonics.push_back({a, b});
    }
    seg.x_min = 0.0;
    seg.x_max = rng.uniform(cfg.segment_length.lo, cfg.segment_length.hi);
    seg.sample_count = cfg.samples_per_segment;
    pieces.push_back(fourier_segment(seg));
  }
  PolylineCurve curve = concatenate_segments(pieces);

  // Scale to the drawn total length about the first point.
  const double target_length = rng.uniform(cfg.curve_length.lo, cfg.curve_length.hi);
  {
    const double scale = target_length / curve.length();
    const Vec2 origin = curve.front();
    std::vector<Vec2> pts;
    pts.reserve(curve.size());
    for (const auto& p : curve.points()) pts.push_back(origin + scale * (p - origin));
    curve = PolylineCurve(std::move(pts));
  }
  while (curve.size() < static_cast<std::size_t>(cfg.m)) {
    curve = curve.densified(curve.length() / static_cast<double>(2 * curve.size()));
  }
  const double half_thickness = rng.uniform(cfg.half_thickness.lo, cfg.half_thickness.hi);
  const auto key_idx = sample_keypoint_indices(curve, cfg.m, cfg.tau_u);

  // Random rigid placement that keeps the thickened curve inside the roi.
  const double rotation = rng.uniform(0.0, 2.0 * kPi);
  const PolylineCurve rotated = transform_curve(curve, Vec2::Zero(), rotation);
  Vec2 lo = rotated.front();
  Vec2 hi = rotated.front();
  for (const auto& p : rotated.points()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const WorldImageMap map(cfg.roi, cfg.dims);
  const double margin = half_thickness + 1.0 / std::min(map.scale_x(), map.scale_y());
  const double tx_lo = cfg.roi.x_min + margin - lo.x();
  const double tx_hi = cfg.roi.x_max - margin - hi.x();
  const double ty_lo = cfg.roi.y_min + margin - lo.y();
  const double ty_hi = cfg.roi.y_max - margin - hi.y();
  const double ux = rng.uniform();
  const double uy = rng.uniform();
  if (tx_lo > tx_hi || ty_lo > ty_hi) return std::nullopt;
  const Vec2 shift(tx_lo + ux * (tx_hi - tx_lo), ty_lo + uy * (ty_hi - ty_lo));
  const PolylineCurve placed = transform_curve(curve, shift, rotation);

  GeneratedSample out;
  out.sample.image = rasterize(placed, half_thickness, cfg.dims, cfg.roi);
  if (static_cast<double>(out.sample.image.count()) <
      0.01 * cfg.dims.width * static_cast<double>(cfg.dims.height)) {
    return std::nullopt;
  }

  std::vector<Vec2> image_pts;
  image_pts.reserve(placed.size());
  for (const auto& p : placed.points()) image_pts.push_back(map.to_image(p));
  PolylineCurve image_curve(std::move(image_pts));
  KeypointSequence labels{{}, Frame::image};
  for (std::size_t i : key_idx) labels.points.push_back(image_curve[i]);

  const Vec2& first = labels.points.front();
  const Vec2& last = labels.points.back();
  if (last.x() < first.x() || (last.x() == first.x() && last.y() < first.y())) {
    labels = labels.reversed();
    image_curve = image_curve.reversed();
  }
  for (const auto& p : labels.points) {
    if (!out.sample.image.at(p)) return std::nullopt;
  }

  out.sample.keypoints = std::move(labels);
  out.sample.meta.half_thickness_px =
      static_cast<float>(half_thickness * std::min(map.scale_x(), map.scale_y()));
  out.sample.meta.curve_length_px = static_cast<float>(image_curve.length());
  out.sample.meta.segment_count = static_cast<std::uint16_t>(nseg);
  out.curve_image = std::move(image_curve);
  return out;
}

}  // namespace

GeneratedSample generate_sample_full(const GenConfig& config, std::uint64_t seed) {
  config.validate();
  for (int r = 0; r <= config.max_retries; ++r) {
    const std::uint64_t attempt_seed = r == 0 ? seed : splitmix64(seed + static_cast<std::uint64_t>(r));
    if (auto s = try_generate(config, attempt_seed)) {
      s->sample.meta.seed = seed;
      s->retries = r;
      return std::move(*s);
    }
  }
  throw ParameterError(fmt::format("sample generation failed after {} retries (seed {:#x})",
                                   config.max_retries, seed));
}

LabeledSample generate_sample(const GenConfig& config, std::uint64_t seed) {
  return generate_sample_full(config, seed).sample;
}

// ---------------------------------------------------------------------------
// Binary record

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xFF));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_f32(std::vector<std::uint8_t>& b, float f) { put_u32(b, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, bool big_endian)
      : bytes_(bytes), big_(big_endian) {}

  std::uint64_t read(std::size_t offset, int width) const {
    if (offset + static_cast<std::size_t>(width) > bytes_.size()) {
      throw FormatError("truncated sample record", bytes_.size());
    }
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      const int shift = big_ ? 8 * (width - 1 - i) : 8 * i;
      v |= static_cast<std::uint64_t>(bytes_[offset + static_cast<std::size_t>(i)]) << shift;
    }
    return v;
  }
  std::uint16_t u16(std::size_t o) const { return static_cast<std::uint16_t>(read(o, 2)); }
  std::uint64_t u64(std::size_t o) const { return read(o, 8); }
  float f32(std::size_t o) const {
    return std::bit_cast<float>(static_cast<std::uint32_t>(read(o, 4)));
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  bool big_;
};

}  // namespace

std::vector<std::uint8_t> encode_sample(const LabeledSample& s) {
  std::vector<std::uint8_t> b;
  const int w = s.image.width();
  const int h = s.image.height();
  const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
  b.reserve(kHeaderSize + row_bytes * static_cast<std::size_t>(h) + 8 * s.keypoints.size());
  b.insert(b.end(), {'D', 'L', 'O', 'S'});
  put_u16(b, kRecordVersion);
  put_u16(b, kByteOrderMark);
  put_u16(b, static_cast<std::uint16_t>(w));
  put_u16(b, static_cast<std::uint16_t>(h));
  put_u16(b, static_cast<std::uint16_t>(s.keypoints.size()));
  put_u16(b, s.meta.segment_count);
  put_u64(b, s.meta.seed);
  put_f32(b, s.meta.half_thickness_px);
  put_f32(b, s.meta.curve_length_px);
  for (int v = 0; v < h; ++v) {
    for (std::size_t byte = 0; byte < row_bytes; ++byte) {
      std::uint8_t packed = 0;
      for (int bit = 0; bit < 8; ++bit) {
        const int u = static_cast<int>(byte) * 8 + bit;
        if (u < w && s.image.get(u, v)) packed |= static_cast<std::uint8_t>(0x80 >> bit);
      }
      b.push_back(packed);
    }
  }
  for (const auto& p : s.keypoints.points) {
    put_f32(b, static_cast<float>(p.x()));
    put_f32(b, static_cast<float>(p.y()));
  }
  return b;
}

LabeledSample decode_sample(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw FormatError("truncated sample record", bytes.size());
  if (std::memcmp(bytes.data(), "DLOS", 4) != 0) throw FormatError("bad magic", 0);
  if (bytes.size() < kHeaderSize) throw FormatError("truncated sample record", bytes.size());

  // The byte-order mark decides how every multi-byte field is read.
  const std::uint16_t bom_le = static_cast<std::uint16_t>(bytes[6] | (bytes[7] << 8));
  bool big_endian = false;
  if (bom_le == kByteOrderMark) {
    big_endian = false;
  } else if (bom_le == 0xFFFE) {
    big_endian = true;
  } else {
    throw FormatError("bad byte-order mark", 6);
  }
  const Reader r(bytes, big_endian);
  if (r.u16(4) != kRecordVersion) throw FormatError("unsupported record version", 4);
  const int w = r.u16(8);
  const int h = r.u16(10);
  const int m = r.u16(12);
  if (w == 0 || h == 0) throw FormatError("zero image dimension", 8);

  LabeledSample s;
  s.meta.segment_count = r.u16(14);
  s.meta.seed = r.u64(16);
  s.meta.half_thickness_px = r.f32(24);
  s.meta.curve_length_px = r.f32(28);

  const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
  const std::size_t image_end = kHeaderSize + row_bytes * static_cast<std::size_t>(h);
  const std::size_t total = image_end + 8 * static_cast<std::size_t>(m);
  if (bytes.size() < total) throw FormatError("truncated sample record", bytes.size());
  if (bytes.size() > total) throw FormatError("trailing bytes after sample record", total);

  s.image = BinaryImage(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::uint8_t packed =
          bytes[kHeaderSize + static_cast<std::size_t>(v) * row_bytes + static_cast<std::size_t>(u / 8)];
      if (packed & (0x80 >> (u % 8))) s.image.set(u, v);
    }
  }
  s.keypoints.frame = Frame::image;
  for (int j = 0; j < m; ++j) {
    const std::size_t o = image_end + 8 * static_cast<std::size_t>(j);
    const float u = r.f32(o);
    const float v = r.f32(o + 4);
    if (!std::isfinite(u) || !std::isfinite(v)) throw FormatError("non-finite keypoint", o);
    s.keypoints.points.emplace_back(u, v);
  }
  return s;
}

void save_sample(const LabeledSample& sample, const std::filesystem::path& path) {
  const auto bytes = encode_sample(sample);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

LabeledSample load_sample(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_sample(bytes);
}

// ---------------------------------------------------------------------------
// Dataset directory

std::string sample_relative_path(const GenConfig& config, std::size_t index) {
  return fmt::format("{}/sample_{:06d}.dlos", is_test_index(config, index) ? "test" : "train",
                     index);
}

std::string dataset_manifest(const GenConfig& c) {
  std::string out;
  auto kv = [&out](std::string_view k, const std::string& v) {
    out += fmt::format("{} = {}\n", k, v);
  };
  auto range = [](const Range& r) { return fmt::format("{} {}", r.lo, r.hi); };
  auto irange = [](const IntRange& r) { return fmt::format("{} {}", r.lo, r.hi); };
  out += "# dloshape synthetic dataset manifest\n";
  kv("format", "dlo-synth");
  kv("version", "1");
  kv("record_format", "DLOS v1, see docs/formats.md");
  kv("seed_scheme",
     "sample_seed = splitmix64(seed ^ splitmix64(index)); retry r>0 uses splitmix64(sample_seed + r)");
  kv("config.seed", fmt::format("{}", c.seed));
  kv("config.samples", fmt::format("{}", c.samples));
  kv("config.m", fmt::format("{}", c.m));
  kv("config.image", fmt::format("{} {}", c.dims.width, c.dims.height));
  kv("config.roi", fmt::format("{} {} {} {}", c.roi.x_min, c.roi.y_min, c.roi.x_max, c.roi.y_max));
  kv("config.segments", irange(c.segments));
  kv("config.harmonics", irange(c.harmonics));
  kv("config.coefficient", range(c.coefficient));
  kv("config.omega", range(c.omega));
  kv("config.segment_length", range(c.segment_length));
  kv("config.samples_per_segment", fmt::format("{}", c.samples_per_segment));
  kv("config.curve_length", range(c.curve_length));
  kv("config.half_thickness", range(c.half_thickness));
  kv("config.tau_u", fmt::format("{}", c.tau_u));
  kv("config.split", fmt::format("{}:{}", c.split_train, c.split_test));
  kv("config.max_retries", fmt::format("{}", c.max_retries));
  std::size_t test = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(c.samples); ++i) test += is_test_index(c, i);
  kv("train_count", fmt::format("{}", static_cast<std::size_t>(c.samples) - test));
  kv("test_count", fmt::format("{}", test));
  for (std::size_t i = 0; i < static_cast<std::size_t>(c.samples); ++i) {
    out += fmt::format("sample.{:06d} = {:#018x} {}\n", i, sample_seed(c, i),
                       sample_relative_path(c, i));
  }
  return out;
}

namespace {

std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) return {};
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

DatasetSummary generate_dataset(const GenConfig& config, const std::filesystem::path& out,
                                int jobs) {
  namespace fs = std::filesystem;
  config.validate();
  const std::string manifest = dataset_manifest(config);
  const auto n = static_cast<std::size_t>(config.samples);

  DatasetSummary summary;
  for (std::size_t i = 0; i < n; ++i) (is_test_index(config, i) ? summary.test : summary.train)++;

  const fs::path manifest_path = out / "manifest.txt";
  if (fs::exists(manifest_path) && fnv1a(read_text(manifest_path)) == fnv1a(manifest)) {
    bool complete = true;
    for (std::size_t i = 0; i < n && complete; ++i) {
      complete = fs::exists(out / sample_relative_path(config, i));
    }
    if (complete) {
      summary.skipped = true;
      return summary;
    }
  }

  std::error_code ec;
  fs::create_directories(out / "train", ec);
  fs::create_directories(out / "test", ec);
  if (ec) throw IoError("cannot create dataset directories under " + out.string());

  std::vector<std::vector<std::uint8_t>> records(n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(1, jobs)));
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) {
            records[i] = encode_sample(generate_sample(config, sample_seed(config, i)));
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const fs::path p = out / sample_relative_path(config, i);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + p.string() + " for writing");
    f.write(reinterpret_cast<const char*>(records[i].data()),
            static_cast<std::streamsize>(records[i].size()));
    if (!f) throw IoError("write failed: " + p.string());
  }
  std::ofstream mf(manifest_path, std::ios::binary | std::ios::trunc);
  if (!mf) throw IoError("cannot write " + manifest_path.string());
  mf << manifest;
  if (!mf) throw IoError("write failed: " + manifest_path.string());
  return summary;
}

std::vector<ManifestEntry> read_manifest_entries(const std::filesystem::path& dir) {
  std::ifstream f(dir / "manifest.txt");
  if (!f) throw IoError("cannot open " + (dir / "manifest.txt").string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(f, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (line.rfind("sample.", 0) != 0) continue;
    std::istringstream ls(line.substr(7));
    ManifestEntry e;
    std::string eq;
    std::string seed_hex;
    if (!(ls >> e.index >> eq >> seed_hex >> e.path) || eq != "=") {
      throw FormatError("malformed manifest sample line", line_offset);
    }
    e.seed = std::stoull(seed_hex, nullptr, 16);
    e.test = e.path.rfind("test/", 0) == 0;
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace dlo
