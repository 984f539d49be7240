#include "kcover/render.hpp"

#include <algorithm>
#include <cmath>

#include "kcover/errors.hpp"

namespace kcover {

namespace {

constexpr Rgb kMarker{220, 30, 30};
constexpr Rgb kMarkerRim{255, 255, 255};

int order_at(const CumulativeVisibility& cumvis, Cell c, double z) {
  int n = 0;
  for (int l = 1; l <= cumvis.k(); ++l)
    if (cumvis.at(l, c) < z) ++n;
  return n;
}

Rgb lerp(Rgb a, Rgb b, double t) {
  auto mix = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + t * (static_cast<double>(y) - x)));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

void fill_block(Image& img, int x0, int y0, int w, int h, Rgb color) {
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x)
      if (img.contains({x, y})) img(x, y) = color;
}

void draw_marker(Image& img, double cx, double cy, double radius) {
  const int r = static_cast<int>(std::ceil(radius)) + 1;
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  for (int y = y0 - r; y <= y0 + r; ++y) {
    for (int x = x0 - r; x <= x0 + r; ++x) {
      if (!img.contains({x, y})) continue;
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      if (d <= radius) img(x, y) = kMarker;
      else if (d <= radius + 1.0) img(x, y) = kMarkerRim;
    }
  }
}

}  // namespace

std::vector<Rgb> order_palette(int k, const std::string& colormap) {
  if (k < 1) throw DomainError("order must be at least 1");
  std::vector<Rgb> out;
  if (colormap == "gray") {
    out.push_back({170, 40, 40});
    for (int n = 0; n <= k; ++n) {
      const auto v = static_cast<std::uint8_t>(std::lround(30.0 + 225.0 * n / k));
      out.push_back({v, v, v});
    }
    return out;
  }
  if (colormap != "discrete") throw DomainError("unknown colormap: " + colormap);
  out.push_back({60, 60, 60});
  // order 0 is pale; positive orders walk a yellow -> green -> teal ramp
  out.push_back({235, 235, 235});
  static const Rgb stops[] = {{253, 231, 37}, {94, 201, 98}, {33, 145, 140}, {59, 82, 139}};
  for (int n = 1; n <= k; ++n) {
    const double t = k == 1 ? 1.0 : static_cast<double>(n - 1) / (k - 1);
    const double pos = t * 3.0;
    const int seg = std::min(2, static_cast<int>(pos));
    out.push_back(lerp(stops[seg], stops[seg + 1], pos - seg));
  }
  return out;
}

Grid<int> order_slice(const Environment& env, const CumulativeVisibility& cumvis, const SliceSpec& spec) {
  if (cumvis.width() != env.width() || cumvis.height() != env.height())
    throw DomainError("cumulative visibility does not match the environment grid");
  const double z_ceil = env.z_ceil();

  if (spec.axis == SliceAxis::horizontal) {
    if (!(spec.altitude >= 0.0 && spec.altitude <= z_ceil))
      throw DomainError("slice altitude outside [0, z_ceil]");
    Grid<int> out(env.width(), env.height(), 0);
    for (int j = 0; j < env.height(); ++j)
      for (int i = 0; i < env.width(); ++i) {
        const Cell c{i, j};
        out[c] = env.height_at(c) < spec.altitude ? order_at(cumvis, c, spec.altitude) : -1;
      }
    return out;
  }

  const bool row = spec.axis == SliceAxis::row;
  const int limit = row ? env.height() : env.width();
  if (spec.index < 0 || spec.index >= limit) throw DomainError("slice index outside the grid");
  if (spec.altitude_samples < 1) throw DomainError("altitude_samples must be positive");
  const int along = row ? env.width() : env.height();
  Grid<int> out(along, spec.altitude_samples, 0);
  for (int s = 0; s < spec.altitude_samples; ++s) {
    const double z = (s + 0.5) / spec.altitude_samples * z_ceil;
    for (int a = 0; a < along; ++a) {
      const Cell c = row ? Cell{a, spec.index} : Cell{spec.index, a};
      out(a, s) = env.height_at(c) < z ? order_at(cumvis, c, z) : -1;
    }
  }
  return out;
}

Rendering render_order_slice(const Environment& env, const CumulativeVisibility& cumvis, const SliceSpec& spec,
                             const SensorSet* sensors) {
  if (spec.scale < 1) throw DomainError("scale must be positive");
  const Grid<int> orders = order_slice(env, cumvis, spec);
  const std::vector<Rgb> palette = order_palette(cumvis.k(), spec.colormap);
  const int s = spec.scale;
  const int w = orders.width();
  const int h = orders.height();

  Rendering out{Image(w * s, h * s, Rgb{}), 0};
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const int o = orders(u, v);
      Rgb color = palette[static_cast<std::size_t>(o + 1)];
      if (spec.terrain_contour && spec.axis == SliceAxis::horizontal && o >= 0 &&
          env.height_at({u, v}) > env.ground_threshold())
        color = lerp(color, Rgb{0, 0, 0}, 0.35);
      fill_block(out.image, u * s, (h - 1 - v) * s, s, s, color);
    }

  if (sensors != nullptr && spec.sensors) {
    const double radius = std::max(1.0, 0.4 * s);
    for (const PlacedSensor& p : *sensors) {
      double px;
      double py;
      if (spec.axis == SliceAxis::horizontal) {
        px = (p.cell.i + 0.5) * s;
        py = (h - 1 - p.cell.j + 0.5) * s;
      } else {
        const bool row = spec.axis == SliceAxis::row;
        if ((row ? p.cell.j : p.cell.i) != spec.index) continue;
        const int along = row ? p.cell.i : p.cell.j;
        px = (along + 0.5) * s;
        py = (1.0 - p.position.z / env.z_ceil()) * h * s;
      }
      draw_marker(out.image, px, py, radius);
      ++out.markers;
    }
  }
  return out;
}

Rendering render_placement(const Environment& env, const SensorSet& sensors, const CumulativeVisibility& cumvis,
                           double altitude, int scale) {
  SliceSpec spec;
  spec.axis = SliceAxis::horizontal;
  spec.altitude = altitude;
  spec.scale = scale;
  spec.terrain_contour = false;
  return render_order_slice(env, cumvis, spec, &sensors);
}

}  // namespace kcover
