#pragma once

#include <span>
#include <vector>

#include "kcover/envmodel.hpp"
#include "kcover/grid.hpp"
#include "kcover/visibility.hpp"

namespace kcover {

/// Layers C_1..C_k of per-cell order statistics over placed sensors'
/// visibility fields: layer l holds the l-th smallest field value at each
/// cell, or the sentinel z_ceil when fewer than l sensors contributed one.
/// A point (cell, z) is seen by at least l sensors iff z > C_l(cell).
class CumulativeVisibility {
 public:
  CumulativeVisibility(int width, int height, int k, double z_ceil);
  CumulativeVisibility(const Environment& env, int k)
      : CumulativeVisibility(env.width(), env.height(), k, env.z_ceil()) {}

  int k() const noexcept { return static_cast<int>(layers_.size()); }
  int width() const noexcept { return layers_.front().width(); }
  int height() const noexcept { return layers_.front().height(); }
  double sentinel() const noexcept { return sentinel_; }
  int sensor_count() const noexcept { return sensors_; }

  /// Layer l, 1-based as in C_1..C_k.
  const Grid<double>& layer(int l) const;
  double at(int l, Cell c) const { return layer(l)[c]; }

  /// Sorted insertion of one field into every cell, truncated at k.
  void insert(const VisibilityField& field);

  friend bool operator==(const CumulativeVisibility&, const CumulativeVisibility&) = default;

 private:
  std::vector<Grid<double>> layers_;
  double sentinel_;
  int sensors_ = 0;
};

CumulativeVisibility update_cumvis(CumulativeVisibility cumvis, const VisibilityField& field);

/// Free volume above `level` in one column: (z_ceil - max(level, terrain))+.
inline double column_free_above(double z_ceil, double level, double terrain) noexcept {
  const double floor = level > terrain ? level : terrain;
  return floor < z_ceil ? z_ceil - floor : 0.0;
}

/// Integral over free space of min(order of visibility, k).
double psi_k(const Environment& env, const CumulativeVisibility& cumvis);

/// Volume of free space seen by at least k sensors.
double k_covered_volume(const Environment& env, const CumulativeVisibility& cumvis);

}  // namespace kcover
