#pragma once

#include <span>

#include "kcover/envmodel.hpp"
#include "kcover/grid.hpp"

namespace kcover {

/// Per-cell minimal visible altitude g(cell) for one sensor: the point
/// (cell center, z) is visible iff z > g(cell). Values lie in [0, z_ceil];
/// z_ceil means nothing below the ceiling is visible in that column.
struct VisibilityField {
  Point3 origin;
  Grid<double> values;
};

enum class FieldMethod {
  /// Per-cell exact cell walk, O(M) per cell.
  exact,
  /// Radial sweep along rays to every boundary cell, about O(M^2) per field.
  sweep,
};

/// Exact line-of-sight test under the piecewise-constant terrain model:
/// the segment is walked cell by cell and its altitude over each traversed
/// cell is compared with that cell's height. Touching an obstacle counts as
/// blocked. Throws DomainError if an endpoint is not in free space.
bool line_of_sight(const Environment& env, const Point3& a, const Point3& b);

VisibilityField visibility_field_exact(const Environment& env, const Point3& sensor);
VisibilityField visibility_field_sweep(const Environment& env, const Point3& sensor);

inline VisibilityField visibility_field(const Environment& env, const Point3& sensor,
                                        FieldMethod method = FieldMethod::sweep) {
  return method == FieldMethod::exact ? visibility_field_exact(env, sensor)
                                      : visibility_field_sweep(env, sensor);
}

/// Number of sensors with line of sight to y. Co-located sensors each count.
int order_of_visibility(const Environment& env, std::span<const Point3> sensors, const Point3& y);

/// Volume of free space visible from the field's sensor.
double visible_volume(const Environment& env, const VisibilityField& field);

}  // namespace kcover
