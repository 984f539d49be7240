#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kcover/grid.hpp"

namespace kcover {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster; pixel (x, y) with y = 0 the top row.
using Image = Grid<Rgb>;

/// Grayscale PNG samples, widened to 16 bits when the file is 8-bit
/// (bit_depth records the original depth). Palette and RGB(A) files are
/// converted to gray; alpha is dropped.
struct GrayImage {
  Grid<std::uint16_t> pixels;
  int bit_depth = 8;
};

GrayImage read_gray_png(const std::filesystem::path& path);
void write_gray8_png(const std::filesystem::path& path, const Grid<std::uint8_t>& pixels);
void write_gray16_png(const std::filesystem::path& path, const Grid<std::uint16_t>& pixels);
void write_rgb_png(const std::filesystem::path& path, const Image& image);

}  // namespace kcover
