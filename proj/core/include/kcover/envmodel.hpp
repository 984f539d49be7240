#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kcover/grid.hpp"

namespace kcover {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Nonzero entries mark building footprint cells.
using BinaryMask = Grid<std::uint8_t>;

/// Piecewise-constant terrain: cell (i, j) covers [i, i+1) x [j, j+1) in cell
/// units and carries one flat height. At least 2x2 cells, heights finite and >= 0.
class HeightField {
 public:
  HeightField(Grid<double> heights, double cell_size = 1.0);

  int width() const noexcept { return heights_.width(); }
  int height() const noexcept { return heights_.height(); }
  double cell_size() const noexcept { return cell_size_; }
  double cell_area() const noexcept { return cell_size_ * cell_size_; }
  double max_height() const noexcept { return max_height_; }

  double operator[](Cell c) const noexcept { return heights_[c]; }
  const Grid<double>& values() const noexcept { return heights_; }

 private:
  Grid<double> heights_;
  double cell_size_;
  double max_height_ = 0.0;
};

struct EnvironmentParams {
  double z_ceil = 1.0;
  /// Mounting offset of a sensor above the terrain of its cell.
  double sensor_height = 0.02;
  /// Cells whose terrain is at most this high are legal sensor sites.
  double ground_threshold = 0.0;
};

/// Heightfield environment. Free space is the open set {z > f(x, y)} inside
/// the box [0, W] x [0, H] x [0, z_ceil]; immutable after construction.
class Environment {
 public:
  explicit Environment(HeightField terrain, EnvironmentParams params = {});

  const HeightField& terrain() const noexcept { return terrain_; }
  const EnvironmentParams& params() const noexcept { return params_; }
  double z_ceil() const noexcept { return params_.z_ceil; }
  double sensor_height() const noexcept { return params_.sensor_height; }
  double ground_threshold() const noexcept { return params_.ground_threshold; }

  int width() const noexcept { return terrain_.width(); }
  int height() const noexcept { return terrain_.height(); }
  double cell_size() const noexcept { return terrain_.cell_size(); }
  double cell_area() const noexcept { return terrain_.cell_area(); }
  bool contains(Cell c) const noexcept { return terrain_.values().contains(c); }

  double height_at(Cell c) const noexcept { return terrain_[c]; }

  /// Cell holding horizontal position (x, y) in length units. The right and
  /// top edges of the box belong to the last column/row.
  Cell cell_of(double x, double y) const;

  Point3 cell_center(Cell c, double z) const noexcept;

  /// Sensor position for a site: cell center at terrain + sensor_height.
  Point3 mount_point(Cell c) const noexcept;

 private:
  HeightField terrain_;
  EnvironmentParams params_;
};

bool is_free(const Environment& env, const Point3& p);

/// Exact Vol(free space) under the piecewise-constant model.
double free_volume(const Environment& env);

/// Whether a sensor may be mounted at `c` (ground cell, mount below ceiling).
bool is_candidate(const Environment& env, Cell c);

/// All legal sensor sites in row-major order; throws ConfigError when empty.
std::vector<Cell> candidate_cells(const Environment& env);

HeightField flat_heightfield(int width, int height, double cell_size = 1.0);

/// 16-bit (value / 65535) or 8-bit (value / 255) grayscale PNG heightmap,
/// scaled by `scale` (typically z_ceil).
HeightField load_heightmap_png(const std::filesystem::path& path, double scale = 1.0,
                               double cell_size = 1.0);

/// Writes heights / scale as a 16-bit grayscale PNG.
void save_heightmap_png(const std::filesystem::path& path, const HeightField& terrain,
                        double scale = 1.0);

/// 8-bit PNG footprint mask; any nonzero gray value marks a building.
BinaryMask load_mask_png(const std::filesystem::path& path);

void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace kcover
