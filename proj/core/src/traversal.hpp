#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "kcover/grid.hpp"

namespace kcover::detail {

// Calls visit(cell, t0, t1) for every cell whose closure meets the segment
// (ax, ay) -> (bx, by), in order of increasing t. Coordinates are in cell
// units. When the segment passes exactly through a cell corner, the two side
// cells touching that corner are visited with a zero-length interval.
//
// Crossing parameters are computed as (boundary - start) / delta for each
// boundary, not accumulated, so that equal crossings on the two axes compare
// equal whenever the inputs are exactly representable.
template <class Visit>
void walk_segment(double ax, double ay, double bx, double by, int width, int height,
                  Visit&& visit) {
  auto clamp_index = [](double u, int n) {
    return std::clamp(static_cast<int>(std::floor(u)), 0, n - 1);
  };
  int i = clamp_index(ax, width);
  int j = clamp_index(ay, height);
  const int end_i = clamp_index(bx, width);
  const int end_j = clamp_index(by, height);

  const double dx = bx - ax;
  const double dy = by - ay;
  const int step_i = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_j = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();

  auto next_x = [&](int ci) {
    if (step_i == 0) return inf;
    const double boundary = step_i > 0 ? ci + 1.0 : static_cast<double>(ci);
    return (boundary - ax) / dx;
  };
  auto next_y = [&](int cj) {
    if (step_j == 0) return inf;
    const double boundary = step_j > 0 ? cj + 1.0 : static_cast<double>(cj);
    return (boundary - ay) / dy;
  };

  double tx = next_x(i);
  double ty = next_y(j);
  double t = 0.0;
  auto inside = [&](int ci, int cj) { return ci >= 0 && cj >= 0 && ci < width && cj < height; };

  for (;;) {
    if ((i == end_i && j == end_j)) {
      visit(Cell{i, j}, t, 1.0);
      return;
    }
    const double t_next = std::min(tx, ty);
    if (!(t_next < 1.0)) {
      visit(Cell{i, j}, t, 1.0);
      return;
    }
    visit(Cell{i, j}, t, t_next);
    if (tx < ty) {
      i += step_i;
      tx = next_x(i);
    } else if (ty < tx) {
      j += step_j;
      ty = next_y(j);
    } else {
      if (inside(i + step_i, j)) visit(Cell{i + step_i, j}, t_next, t_next);
      if (inside(i, j + step_j)) visit(Cell{i, j + step_j}, t_next, t_next);
      i += step_i;
      j += step_j;
      tx = next_x(i);
      ty = next_y(j);
    }
    t = t_next;
    if (!inside(i, j)) return;
  }
}

}  // namespace kcover::detail
