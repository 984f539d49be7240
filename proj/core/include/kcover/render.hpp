#pragma once

#include <string>
#include <vector>

#include "kcover/coverage.hpp"
#include "kcover/envmodel.hpp"
#include "kcover/image_io.hpp"
#include "kcover/planner.hpp"

namespace kcover {

enum class SliceAxis {
  horizontal,  // plane z = altitude
  row,         // vertical plane through grid row `index` (x runs along the image)
  column,      // vertical plane through grid column `index` (y runs along the image)
};

struct SliceSpec {
  SliceAxis axis = SliceAxis::horizontal;
  double altitude = 0.5;
  int index = 0;
  /// Altitude samples of a vertical slice, bottom to top at bin centers.
  int altitude_samples = 64;
  /// Pixels per cell (horizontal) or per cell/altitude sample (vertical).
  int scale = 8;
  /// "discrete" (one hue per order) or "gray".
  std::string colormap = "discrete";
  bool sensors = true;
  /// Darken cells whose terrain is above the ground threshold (horizontal only).
  bool terrain_contour = false;
};

/// Order class per slice pixel cell: min(order, k), or -1 inside an obstacle.
/// Horizontal: W x H grid over cells. Vertical: (cells along axis) x
/// altitude_samples, sample s at altitude (s + 0.5) / samples * z_ceil.
/// Throws DomainError for an out-of-domain slice.
Grid<int> order_slice(const Environment& env, const CumulativeVisibility& cumvis, const SliceSpec& spec);

/// k + 2 colors: index 0 is the obstacle color, index 1 + n is order n.
std::vector<Rgb> order_palette(int k, const std::string& colormap = "discrete");

struct Rendering {
  Image image;
  /// Sensor markers drawn (co-located sensors each count).
  int markers = 0;
};

/// Image rows run north-up: the top row shows the largest y (or altitude).
Rendering render_order_slice(const Environment& env, const CumulativeVisibility& cumvis, const SliceSpec& spec,
                             const SensorSet* sensors = nullptr);

/// Top-down min(order, k) at `altitude` with one marker per placed sensor.
Rendering render_placement(const Environment& env, const SensorSet& sensors, const CumulativeVisibility& cumvis,
                           double altitude = 0.5, int scale = 8);

}  // namespace kcover
