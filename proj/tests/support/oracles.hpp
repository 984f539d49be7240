#pragma once

// Brute-force reference computations. Nothing here calls into the library's
// traversal, field, or coverage code; only the environment container and
// the PNG-free grid types are shared.

#include <cstdint>
#include <random>
#include <vector>

#include <kcover/envmodel.hpp>
#include <kcover/grid.hpp>

namespace oracle {

using kcover::Cell;
using kcover::Environment;
using kcover::Grid;
using kcover::Point3;

/// Terrain height under (x, y) in cell units, right/top edge clamped.
double terrain_at(const Environment& env, double x, double y);

/// Line of sight by sampling the segment every `step` cells of its
/// horizontal length (at least 64 samples); endpoints included.
bool los_sampled(const Environment& env, const Point3& a, const Point3& b, double step = 1.0 / 64.0);

/// Random rectangular blocks with random heights in (0.05, 0.9); cells of
/// row 0 and column 0 are kept clear.
Environment random_blocks(int m, std::uint64_t seed, int blocks = 12, kcover::EnvironmentParams params = {});

/// Uniform point of free space: uniform horizontal position, altitude
/// uniform in (terrain, z_ceil).
Point3 random_free_point(const Environment& env, std::mt19937_64& rng);

/// Midpoint voxel count of free space, Nz levels per column.
double voxel_free_volume(const Environment& env, int nz);

struct VoxelCoverage {
  double psi = 0.0;        // integral of min(order, k)
  double k_covered = 0.0;  // volume with order >= k
};

/// Midpoint voxel integration with the order evaluated by the supplied
/// line-of-sight predicate at every voxel center.
template <class Los>
VoxelCoverage voxel_coverage(const Environment& env, const std::vector<Point3>& sensors, int k, int nz, Los los) {
  VoxelCoverage out;
  const double dz = env.z_ceil() / nz;
  const double dv = env.cell_area() * dz;
  for (int j = 0; j < env.height(); ++j)
    for (int i = 0; i < env.width(); ++i) {
      const double f = env.height_at({i, j});
      for (int s = 0; s < nz; ++s) {
        const double z = (s + 0.5) * dz;
        if (!(z > f)) continue;
        const Point3 y{(i + 0.5) * env.cell_size(), (j + 0.5) * env.cell_size(), z};
        int order = 0;
        for (const auto& x : sensors) order += los(x, y) ? 1 : 0;
        out.psi += std::min(order, k) * dv;
        if (order >= k) out.k_covered += dv;
      }
    }
  return out;
}

/// Layers 1..k as the k smallest of all field values per cell, sorted, padded
/// with the sentinel.
std::vector<Grid<double>> cumvis_from_scratch(const std::vector<Grid<double>>& fields, int k, int width, int height,
                                              double sentinel);

/// Number of 4-connected components of cells where pred(value) holds.
template <class T, class Pred>
int count_components(const Grid<T>& g, Pred pred) {
  Grid<std::uint8_t> seen(g.width(), g.height(), 0);
  int count = 0;
  std::vector<Cell> stack;
  for (int j = 0; j < g.height(); ++j)
    for (int i = 0; i < g.width(); ++i) {
      if (seen(i, j) || !pred(g(i, j))) continue;
      ++count;
      stack.push_back({i, j});
      seen(i, j) = 1;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        const Cell next[] = {{c.i + 1, c.j}, {c.i - 1, c.j}, {c.i, c.j + 1}, {c.i, c.j - 1}};
        for (Cell n : next)
          if (g.contains(n) && !seen[n] && pred(g[n])) {
            seen[n] = 1;
            stack.push_back(n);
          }
      }
    }
  return count;
}

}  // namespace oracle
