#pragma once

#include <filesystem>

#include "dlo/raster.hpp"

namespace dlo {

/// Netpbm bitmap, plain (P1) or raw (P4). 1 is a positive pixel.
BinaryImage read_pbm(const std::filesystem::path& path);
void write_pbm(const BinaryImage& image, const std::filesystem::path& path);

/// PNG of any colour type; a pixel is positive when its luma is at least `threshold`
/// (0-255) and it is not transparent.
BinaryImage read_png(const std::filesystem::path& path, int threshold = 128);
/// 8-bit greyscale PNG, positive pixels white.
void write_png(const BinaryImage& image, const std::filesystem::path& path);

/// Dispatch on extension: .pbm, .png or .dlos (dataset record).
BinaryImage load_image(const std::filesystem::path& path);

}  // namespace dlo
