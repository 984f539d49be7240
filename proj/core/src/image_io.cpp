#include "kcover/image_io.hpp"

#include <png.h>

#include <cstring>
#include <string>

#include "kcover/errors.hpp"

namespace kcover {
namespace {

png_image make_header(int width, int height, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  return image;
}

void write_image(const std::filesystem::path& path, png_image& image, const void* buffer) {
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer, 0, nullptr))
    throw IoError("cannot write " + path.string() + ": " + image.message);
}

}  // namespace

GrayImage read_gray_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError("cannot read " + path.string() + ": " + image.message);

  const bool sixteen = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  image.format = sixteen ? PNG_FORMAT_LINEAR_Y : PNG_FORMAT_GRAY;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);

  GrayImage out;
  out.bit_depth = sixteen ? 16 : 8;
  out.pixels = Grid<std::uint16_t>(width, height);
  if (sixteen) {
    if (!png_image_finish_read(&image, nullptr, out.pixels.values().data(), 0, nullptr))
      throw IoError("cannot decode " + path.string() + ": " + image.message);
  } else {
    Grid<std::uint8_t> bytes(width, height);
    if (!png_image_finish_read(&image, nullptr, bytes.values().data(), 0, nullptr))
      throw IoError("cannot decode " + path.string() + ": " + image.message);
    for (std::size_t n = 0; n < bytes.size(); ++n) out.pixels.values()[n] = bytes.values()[n];
  }
  return out;
}

void write_gray8_png(const std::filesystem::path& path, const Grid<std::uint8_t>& pixels) {
  png_image image = make_header(pixels.width(), pixels.height(), PNG_FORMAT_GRAY);
  write_image(path, image, pixels.values().data());
}

void write_gray16_png(const std::filesystem::path& path, const Grid<std::uint16_t>& pixels) {
  png_image image = make_header(pixels.width(), pixels.height(), PNG_FORMAT_LINEAR_Y);
  write_image(path, image, pixels.values().data());
}

void write_rgb_png(const std::filesystem::path& path, const Image& image) {
  static_assert(sizeof(Rgb) == 3);
  png_image header = make_header(image.width(), image.height(), PNG_FORMAT_RGB);
  write_image(path, header, image.values().data());
}

}  // namespace kcover
