#include "dlo/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dlo/dataset.hpp"
#include "dlo/error.hpp"

namespace dlo {

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Netpbm header token, skipping whitespace and comments.
std::string next_token(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(static_cast<char>(b[pos++]));
  if (tok.empty()) throw FormatError("truncated netpbm header", pos);
  return tok;
}

int parse_dim(const std::string& tok, std::size_t pos) {
  try {
    const int v = std::stoi(tok);
    if (v <= 0 || v > 65535) throw FormatError("netpbm dimension out of range", pos);
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("bad netpbm dimension '" + tok + "'", pos);
  }
}

}  // namespace

BinaryImage read_pbm(const std::filesystem::path& path) {
  const auto b = read_all(path);
  std::size_t pos = 0;
  const std::string magic = next_token(b, pos);
  if (magic != "P1" && magic != "P4") throw FormatError("not a PBM file", 0);
  const int w = parse_dim(next_token(b, pos), pos);
  const int h = parse_dim(next_token(b, pos), pos);
  BinaryImage img(w, h);
  if (magic == "P1") {
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        while (pos < b.size() && (std::isspace(b[pos]) || b[pos] == '#')) {
          if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
          } else {
            ++pos;
          }
        }
        if (pos >= b.size()) throw FormatError("truncated PBM raster", pos);
        if (b[pos] != '0' && b[pos] != '1') throw FormatError("bad PBM pixel", pos);
        img.set(u, v, b[pos++] == '1');
      }
    }
    return img;
  }
  ++pos;  // single whitespace after the header
  const std::size_t row = static_cast<std::size_t>((w + 7) / 8);
  if (b.size() < pos + row * static_cast<std::size_t>(h)) throw FormatError("truncated PBM raster", b.size());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::uint8_t byte = b[pos + static_cast<std::size_t>(v) * row + static_cast<std::size_t>(u / 8)];
      img.set(u, v, (byte >> (7 - u % 8)) & 1);
    }
  }
  return img;
}

void write_pbm(const BinaryImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P4\n" << image.width() << ' ' << image.height() << '\n';
  const std::size_t row = static_cast<std::size_t>((image.width() + 7) / 8);
  std::vector<char> bytes(row, 0);
  for (int v = 0; v < image.height(); ++v) {
    std::fill(bytes.begin(), bytes.end(), 0);
    for (int u = 0; u < image.width(); ++u) {
      if (image.get(u, v)) bytes[static_cast<std::size_t>(u / 8)] |= static_cast<char>(0x80 >> (u % 8));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(row));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

BinaryImage read_png(const std::filesystem::path& path, int threshold) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
    throw FormatError(std::string("PNG decode failed: ") + img.message, 0);
  }
  img.format = PNG_FORMAT_GA;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw FormatError(std::string("PNG decode failed: ") + img.message, 0);
  }
  const int w = static_cast<int>(img.width);
  const int h = static_cast<int>(img.height);
  BinaryImage out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t i = 2 * (static_cast<std::size_t>(v) * w + u);
      out.set(u, v, buf[i] >= threshold && buf[i + 1] >= 128);
    }
  }
  return out;
}

void write_png(const BinaryImage& image, const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed for " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>(image.width()));
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) row[static_cast<std::size_t>(u)] = image.get(u, v) ? 255 : 0;
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

BinaryImage load_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pbm") return read_pbm(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".dlos") return load_sample(path).image;
  throw ParameterError("unsupported image extension '" + ext + "' (expected .pbm, .png or .dlos)");
}

}  // namespace dlo
