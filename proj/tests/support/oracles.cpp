#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

double terrain_at(const Environment& env, double x, double y) {
  const double cs = env.cell_size();
  const int i = std::min(env.width() - 1, static_cast<int>(std::floor(x / cs)));
  const int j = std::min(env.height() - 1, static_cast<int>(std::floor(y / cs)));
  return env.height_at({i, j});
}

bool los_sampled(const Environment& env, const Point3& a, const Point3& b, double step) {
  const double length = std::hypot(b.x - a.x, b.y - a.y) / env.cell_size();
  const long n = std::max(64L, static_cast<long>(std::ceil(length / step)));
  for (long s = 0; s <= n; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(n);
    const double x = a.x + t * (b.x - a.x);
    const double y = a.y + t * (b.y - a.y);
    const double z = a.z + t * (b.z - a.z);
    if (!(z > terrain_at(env, x, y))) return false;
  }
  return true;
}

Environment random_blocks(int m, std::uint64_t seed, int blocks, kcover::EnvironmentParams params) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> side(1, std::max(1, m / 5));
  std::uniform_int_distribution<int> pos(1, m - 1);
  std::uniform_real_distribution<double> h(0.05, 0.9);
  Grid<double> f(m, m, 0.0);
  for (int b = 0; b < blocks; ++b) {
    const int x0 = pos(rng);
    const int y0 = pos(rng);
    const int w = side(rng);
    const int d = side(rng);
    const double level = h(rng);
    for (int y = y0; y < std::min(m, y0 + d); ++y)
      for (int x = x0; x < std::min(m, x0 + w); ++x) f(x, y) = level;
  }
  return Environment(kcover::HeightField(std::move(f)), params);
}

Point3 random_free_point(const Environment& env, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double x = u(rng) * env.width() * env.cell_size();
    const double y = u(rng) * env.height() * env.cell_size();
    const double f = terrain_at(env, x, y);
    if (f >= env.z_ceil()) continue;
    const double z = f + (env.z_ceil() - f) * u(rng);
    if (z > f) return {x, y, z};
  }
}

double voxel_free_volume(const Environment& env, int nz) {
  const double dz = env.z_ceil() / nz;
  double v = 0.0;
  for (int j = 0; j < env.height(); ++j)
    for (int i = 0; i < env.width(); ++i) {
      const double f = env.height_at({i, j});
      long count = 0;
      for (int s = 0; s < nz; ++s)
        if ((s + 0.5) * dz > f) ++count;
      v += static_cast<double>(count) * dz * env.cell_area();
    }
  return v;
}

std::vector<Grid<double>> cumvis_from_scratch(const std::vector<Grid<double>>& fields, int k, int width, int height,
                                              double sentinel) {
  std::vector<Grid<double>> layers(static_cast<std::size_t>(k), Grid<double>(width, height, sentinel));
  std::vector<double> column;
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      column.clear();
      for (const auto& f : fields) column.push_back(std::min(f(i, j), sentinel));
      std::sort(column.begin(), column.end());
      for (int l = 0; l < k && l < static_cast<int>(column.size()); ++l)
        layers[static_cast<std::size_t>(l)](i, j) = column[static_cast<std::size_t>(l)];
    }
  return layers;
}

}  // namespace oracle
