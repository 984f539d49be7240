#include "kcover/envmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kcover/errors.hpp"
#include "kcover/image_io.hpp"

namespace kcover {

HeightField::HeightField(Grid<double> heights, double cell_size)
    : heights_(std::move(heights)), cell_size_(cell_size) {
  if (heights_.width() < 2 || heights_.height() < 2)
    throw DomainError("height field must be at least 2x2 cells");
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_))
    throw DomainError("cell size must be positive and finite");
  for (double v : heights_.values()) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("terrain heights must be finite and >= 0");
    max_height_ = std::max(max_height_, v);
  }
}

Environment::Environment(HeightField terrain, EnvironmentParams params)
    : terrain_(std::move(terrain)), params_(params) {
  if (!(params_.z_ceil > 0.0) || !std::isfinite(params_.z_ceil))
    throw ConfigError("z_ceil must be positive and finite");
  if (!(params_.sensor_height > 0.0)) throw ConfigError("sensor_height must be positive");
  if (!std::isfinite(params_.ground_threshold))
    throw ConfigError("ground_threshold must be finite");
  // Saturated cells (f == z_ceil) are allowed and simply hold no free volume.
  if (terrain_.max_height() > params_.z_ceil)
    throw DomainError("terrain exceeds the domain ceiling");
}

Cell Environment::cell_of(double x, double y) const {
  const double u = x / cell_size();
  const double v = y / cell_size();
  if (!(u >= 0.0 && v >= 0.0 && u <= width() && v <= height()))
    throw DomainError("point outside the horizontal extent of the grid");
  return {std::min(static_cast<int>(u), width() - 1), std::min(static_cast<int>(v), height() - 1)};
}

Point3 Environment::cell_center(Cell c, double z) const noexcept {
  return {(c.i + 0.5) * cell_size(), (c.j + 0.5) * cell_size(), z};
}

Point3 Environment::mount_point(Cell c) const noexcept {
  return cell_center(c, height_at(c) + sensor_height());
}

bool is_free(const Environment& env, const Point3& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
    throw DomainError("point coordinates must be finite");
  if (p.z < 0.0 || p.z > env.z_ceil()) throw DomainError("altitude outside [0, z_ceil]");
  return env.height_at(env.cell_of(p.x, p.y)) < p.z;
}

double free_volume(const Environment& env) {
  double total = 0.0;
  for (double f : env.terrain().values().values()) total += env.z_ceil() - f;
  return total * env.cell_area();
}

bool is_candidate(const Environment& env, Cell c) {
  if (!env.contains(c)) return false;
  const double f = env.height_at(c);
  return f <= env.ground_threshold() && f + env.sensor_height() < env.z_ceil();
}

std::vector<Cell> candidate_cells(const Environment& env) {
  std::vector<Cell> out;
  for (int j = 0; j < env.height(); ++j)
    for (int i = 0; i < env.width(); ++i)
      if (is_candidate(env, {i, j})) out.push_back({i, j});
  if (out.empty()) throw ConfigError("environment has no legal sensor site");
  return out;
}

HeightField flat_heightfield(int width, int height, double cell_size) {
  return HeightField(Grid<double>(width, height, 0.0), cell_size);
}

HeightField load_heightmap_png(const std::filesystem::path& path, double scale, double cell_size) {
  const GrayImage img = read_gray_png(path);
  const double full = img.bit_depth == 16 ? 65535.0 : 255.0;
  Grid<double> heights(img.pixels.width(), img.pixels.height());
  for (std::size_t n = 0; n < heights.size(); ++n)
    heights.values()[n] = scale * (img.pixels.values()[n] / full);
  return HeightField(std::move(heights), cell_size);
}

void save_heightmap_png(const std::filesystem::path& path, const HeightField& terrain,
                        double scale) {
  Grid<std::uint16_t> px(terrain.width(), terrain.height());
  for (std::size_t n = 0; n < px.size(); ++n) {
    const double v = std::clamp(terrain.values().values()[n] / scale, 0.0, 1.0);
    px.values()[n] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
  }
  write_gray16_png(path, px);
}

BinaryMask load_mask_png(const std::filesystem::path& path) {
  const GrayImage img = read_gray_png(path);
  BinaryMask mask(img.pixels.width(), img.pixels.height());
  for (std::size_t n = 0; n < mask.size(); ++n)
    mask.values()[n] = img.pixels.values()[n] != 0 ? 1 : 0;
  return mask;
}

void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  Grid<std::uint8_t> px(mask.width(), mask.height());
  for (std::size_t n = 0; n < px.size(); ++n) px.values()[n] = mask.values()[n] ? 255 : 0;
  write_gray8_png(path, px);
}

}  // namespace kcover
