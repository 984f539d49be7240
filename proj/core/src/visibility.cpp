#include "kcover/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "kcover/errors.hpp"
#include "traversal.hpp"

namespace kcover {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRaysPerCell = 4;

void require_free(const Environment& env, const Point3& p, const char* what) {
  if (!is_free(env, p)) throw DomainError(std::string(what) + " is not in free space");
}

// Lowest altitude at the far end of a segment from a sensor at altitude
// sensor_z such that the part of the segment over a cell of height h,
// traversed for t in [t0, t1], stays strictly above h.
double required_altitude(double h, double sensor_z, double t0, double t1) {
  if (h >= sensor_z) return t0 > 0.0 ? sensor_z + (h - sensor_z) / t0 : kInf;
  return t1 > 0.0 ? sensor_z + (h - sensor_z) / t1 : -kInf;
}

double exact_cell_value(const Environment& env, double su, double sv, double sz, Cell target) {
  double g = -kInf;
  detail::walk_segment(su, sv, target.i + 0.5, target.j + 0.5, env.width(), env.height(),
                       [&](Cell c, double t0, double t1) {
                         g = std::max(g, required_altitude(env.height_at(c), sz, t0, t1));
                       });
  return std::clamp(g, 0.0, env.z_ceil());
}

// Highest requirement from the cells touched only at a corner by the segment
// from a sensor at a cell center (su, sv) to the center offset by the integer
// vector (du, dv). The segment meets a lattice point exactly when both reduced
// components are odd, at t = (2m + 1) / (2 gcd).
double corner_altitude(const Environment& env, double su, double sv, double sz, double du, double dv) {
  const long a = std::lround(std::abs(du));
  const long b = std::lround(std::abs(dv));
  if (a == 0 || b == 0) return -kInf;
  const long g = std::gcd(a, b);
  if ((a / g) % 2 == 0 || (b / g) % 2 == 0) return -kInf;
  const int si = du > 0.0 ? 1 : -1;
  const int sj = dv > 0.0 ? 1 : -1;
  double best = -kInf;
  for (long m = 0; m < g; ++m) {
    const double t = static_cast<double>(2 * m + 1) / static_cast<double>(2 * g);
    const int cx = static_cast<int>(std::floor(su + t * du + 0.5));
    const int cy = static_cast<int>(std::floor(sv + t * dv + 0.5));
    // Cell just before the corner, then its two neighbors across the corner.
    const Cell before{si > 0 ? cx - 1 : cx, sj > 0 ? cy - 1 : cy};
    for (Cell side : {Cell{before.i + si, before.j}, Cell{before.i, before.j + sj}})
      best = std::max(best, sz + (env.height_at(side) - sz) / t);
  }
  return best;
}

// A ray's samples live in shared buffers at [begin, end).
struct Ray {
  double angle = 0.0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

}  // namespace

bool line_of_sight(const Environment& env, const Point3& a, const Point3& b) {
  require_free(env, a, "line-of-sight endpoint");
  require_free(env, b, "line-of-sight endpoint");
  const double cs = env.cell_size();
  bool clear = true;
  detail::walk_segment(a.x / cs, a.y / cs, b.x / cs, b.y / cs, env.width(), env.height(),
                       [&](Cell c, double t0, double t1) {
                         if (!clear) return;
                         const double z0 = a.z + (b.z - a.z) * t0;
                         const double z1 = a.z + (b.z - a.z) * t1;
                         if (std::min(z0, z1) <= env.height_at(c)) clear = false;
                       });
  return clear;
}

VisibilityField visibility_field_exact(const Environment& env, const Point3& sensor) {
  require_free(env, sensor, "sensor");
  const double su = sensor.x / env.cell_size();
  const double sv = sensor.y / env.cell_size();
  VisibilityField field{sensor, Grid<double>(env.width(), env.height())};
  for (int j = 0; j < env.height(); ++j)
    for (int i = 0; i < env.width(); ++i)
      field.values(i, j) = exact_cell_value(env, su, sv, sensor.z, {i, j});
  return field;
}

VisibilityField visibility_field_sweep(const Environment& env, const Point3& sensor) {
  require_free(env, sensor, "sensor");
  const int width = env.width();
  const int height = env.height();
  const double su = sensor.x / env.cell_size();
  const double sv = sensor.y / env.cell_size();
  const double sz = sensor.z;
  const Cell home = env.cell_of(sensor.x, sensor.y);

  // Rays aimed at points spaced 1 / kRaysPerCell apart along the ring of
  // boundary cell centers, each walked once; a ray keeps the running maximum
  // of the slope a sight line must clear, indexed by distance along it.
  std::vector<std::pair<double, double>> boundary;
  const double right = width - 0.5;
  const double top = height - 0.5;
  for (int q = 0; q <= (width - 1) * kRaysPerCell; ++q) {
    const double x = 0.5 + static_cast<double>(q) / kRaysPerCell;
    boundary.emplace_back(x, 0.5);
    if (height > 1) boundary.emplace_back(x, top);
  }
  for (int q = 1; q < (height - 1) * kRaysPerCell; ++q) {
    const double y = 0.5 + static_cast<double>(q) / kRaysPerCell;
    boundary.emplace_back(0.5, y);
    if (width > 1) boundary.emplace_back(right, y);
  }

  std::vector<Ray> rays;
  rays.reserve(boundary.size());
  std::vector<double> exit_distance;
  std::vector<double> max_slope;
  exit_distance.reserve(boundary.size() * static_cast<std::size_t>(width + height + 2));
  max_slope.reserve(exit_distance.capacity());
  for (const auto& [bu, bv] : boundary) {
    const double du = bu - su;
    const double dv = bv - sv;
    const double length = std::hypot(du, dv);
    if (length == 0.0) continue;
    Ray ray;
    ray.angle = std::atan2(dv, du);
    ray.begin = exit_distance.size();
    double running = -kInf;
    detail::walk_segment(su, sv, bu, bv, width, height,
                         [&](Cell c, double t0, double t1) {
                           // Corner touches belong to this ray only; the
                           // target's own corners are added exactly below.
                           if (t0 == t1 && t1 < 1.0) return;
                           const double h = env.height_at(c);
                           double slope;
                           if (h >= sz)
                             slope = t0 > 0.0 ? (h - sz) / (t0 * length) : kInf;
                           else
                             slope = t1 > 0.0 ? (h - sz) / (t1 * length) : -kInf;
                           running = std::max(running, slope);
                           exit_distance.push_back(t1 * length);
                           max_slope.push_back(running);
                         });
    ray.end = exit_distance.size();
    rays.push_back(ray);
  }
  std::sort(rays.begin(), rays.end(), [](const Ray& a, const Ray& b) { return a.angle < b.angle; });
  std::vector<double> angles(rays.size());
  for (std::size_t r = 0; r < rays.size(); ++r) angles[r] = rays[r].angle;

  auto nearest_ray = [&](double angle) -> const Ray& {
    const auto it = std::lower_bound(angles.begin(), angles.end(), angle);
    const std::size_t hi = it == angles.end() ? 0 : static_cast<std::size_t>(it - angles.begin());
    const std::size_t lo = hi == 0 ? angles.size() - 1 : hi - 1;
    auto gap = [&](std::size_t r) {
      double d = std::abs(angle - angles[r]);
      return std::min(d, 2.0 * std::numbers::pi - d);
    };
    return gap(lo) <= gap(hi) ? rays[lo] : rays[hi];
  };

  // From a cell center, sight lines to other centers pass through lattice
  // corners at predictable points.
  const bool centered = su - 0.5 == std::floor(su) && sv - 0.5 == std::floor(sv);

  VisibilityField field{sensor, Grid<double>(width, height)};
  const int home_i = home.i;
  const int home_j = home.j;
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const Cell c{i, j};
      const double h = env.height_at(c);
      const double du = i + 0.5 - su;
      const double dv = j + 0.5 - sv;
      if (c == home || rays.empty() || (du == 0.0 && dv == 0.0)) {
        field.values[c] = exact_cell_value(env, su, sv, sz, c);
        continue;
      }
      // Distance at which the sight line to this cell's center enters the cell.
      double entry = 0.0;
      if (i != home_i) entry = std::max(entry, ((i > home_i ? i : i + 1.0) - su) / du);
      if (j != home_j) entry = std::max(entry, ((j > home_j ? j : j + 1.0) - sv) / dv);
      const double reach = std::hypot(du, dv);
      const double entry_distance = entry * reach;

      const Ray& ray = nearest_ray(std::atan2(dv, du));
      double slope = -kInf;
      const auto first = exit_distance.begin() + static_cast<std::ptrdiff_t>(ray.begin);
      const auto past = std::upper_bound(first, exit_distance.begin() + static_cast<std::ptrdiff_t>(ray.end),
                                         entry_distance * (1.0 + 1e-12));
      if (past != first) slope = max_slope[static_cast<std::size_t>(past - exit_distance.begin()) - 1];
      if (h >= sz) slope = std::max(slope, entry_distance > 0.0 ? (h - sz) / entry_distance : kInf);

      double g = slope == -kInf ? h : std::max(h, sz + slope * reach);
      if (centered) g = std::max(g, corner_altitude(env, su, sv, sz, du, dv));
      field.values[c] = std::clamp(g, 0.0, env.z_ceil());
    }
  }
  return field;
}

int order_of_visibility(const Environment& env, std::span<const Point3> sensors, const Point3& y) {
  require_free(env, y, "query point");
  int order = 0;
  for (const Point3& s : sensors)
    if (line_of_sight(env, s, y)) ++order;
  return order;
}

double visible_volume(const Environment& env, const VisibilityField& field) {
  if (!field.values.same_shape(env.terrain().values()))
    throw DomainError("visibility field does not match the environment grid");
  double total = 0.0;
  const auto& f = env.terrain().values();
  for (std::size_t n = 0; n < f.size(); ++n)
    total += std::max(0.0, env.z_ceil() - std::max(field.values.values()[n], f.values()[n]));
  return total * env.cell_area();
}

}  // namespace kcover
