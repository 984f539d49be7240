#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kcover/coverage.hpp"
#include "kcover/envmodel.hpp"
#include "kcover/grid.hpp"
#include "kcover/rng.hpp"
#include "kcover/visibility.hpp"

namespace kcover {

struct PlacedSensor {
  Cell cell;
  Point3 position;

  friend bool operator==(const PlacedSensor&, const PlacedSensor&) = default;
};

/// Placement sequence; insertion order is the order sensors were placed.
class SensorSet {
 public:
  void add(const Environment& env, Cell cell);

  std::size_t size() const noexcept { return sensors_.size(); }
  bool empty() const noexcept { return sensors_.empty(); }
  const PlacedSensor& operator[](std::size_t n) const { return sensors_.at(n); }
  auto begin() const noexcept { return sensors_.begin(); }
  auto end() const noexcept { return sensors_.end(); }
  std::vector<Point3> positions() const;

  friend bool operator==(const SensorSet&, const SensorSet&) = default;

 private:
  std::vector<PlacedSensor> sensors_;
};

/// Gain values over the grid; cells that are not legal sensor sites are invalid.
class GainMap {
 public:
  GainMap() = default;
  GainMap(int width, int height) : values_(width, height, 0.0), valid_(width, height, 0) {}

  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }

  bool valid(Cell c) const { return valid_[c] != 0; }
  double operator[](Cell c) const { return values_[c]; }
  void set(Cell c, double gain) {
    values_[c] = gain;
    valid_[c] = 1;
  }
  void invalidate(Cell c) {
    values_[c] = 0.0;
    valid_[c] = 0;
  }

  const Grid<double>& values() const noexcept { return values_; }
  const Grid<std::uint8_t>& validity() const noexcept { return valid_; }

  /// Largest valid gain; nullopt when no cell is valid.
  std::optional<double> max_valid() const;

  friend bool operator==(const GainMap&, const GainMap&) = default;

 private:
  Grid<double> values_;
  Grid<std::uint8_t> valid_;
};

enum class GainKind {
  /// Coverage increase times distance to the nearest placed sensor.
  distance_weighted,
  /// Plain increase of the capped coverage integral.
  naive,
};

enum class TieBreak {
  /// Uniform draw from the selection pool under the run seed.
  uniform,
  /// First pool cell in row-major order.
  lowest_index,
};

struct FirstSensor {
  enum class Mode { fixed, random, by_gain };
  Mode mode = Mode::fixed;
  Cell cell{0, 0};

  static FirstSensor at(Cell c) { return {Mode::fixed, c}; }
  static FirstSensor random() { return {Mode::random, {}}; }
  /// Choose the first sensor from the gain map of the empty set; only
  /// meaningful for the naive gain.
  static FirstSensor by_gain() { return {Mode::by_gain, {}}; }
};

struct PlannerConfig {
  int k = 2;
  /// Stop once psi_k >= delta * k * free volume.
  double delta = 0.95;
  double epsilon = 0.0;
  /// Exponent of the horizontal distance norm in the distance-weighted gain.
  double p = 2.0;
  std::uint64_t seed = 0;
  FirstSensor first = FirstSensor::at({0, 0});
  GainKind gain = GainKind::distance_weighted;
  TieBreak tie_break = TieBreak::uniform;
  FieldMethod field_method = FieldMethod::sweep;
  /// Maximum number of sensors; 0 means 4 * k * max(width, height).
  int max_sensors = 0;
  int jobs = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  int sensor_cap(const Environment& env) const;
};

/// Read-only view of the planner state handed to gain providers.
struct PlacementState {
  const Environment& env;
  const CumulativeVisibility& cumvis;
  const SensorSet& sensors;
};

/// Source of dense gain maps: exact evaluation or an external surrogate.
class GainProvider {
 public:
  virtual ~GainProvider() = default;
  virtual GainMap compute(const PlacementState& state) = 0;
  virtual std::string name() const = 0;
};

/// Evaluates the gain at every candidate cell. Visibility fields do not depend
/// on the placement state, so they are cached per candidate while the cache
/// fits in `cache_bytes`.
class ExactGainProvider final : public GainProvider {
 public:
  ExactGainProvider(const Environment& env, GainKind kind = GainKind::distance_weighted,
                    FieldMethod method = FieldMethod::sweep, double p = 2.0, int jobs = 0,
                    std::size_t cache_bytes = std::size_t{512} << 20);
  ~ExactGainProvider() override;

  GainMap compute(const PlacementState& state) override;
  std::string name() const override { return "exact"; }

 private:
  struct Cache;
  const Environment& env_;
  GainKind kind_;
  FieldMethod method_;
  double p_;
  int jobs_;
  std::vector<Cell> candidates_;
  std::unique_ptr<Cache> cache_;
};

/// psi_k after inserting `field` minus psi_k before. Per cell only the
/// displaced k-th layer changes the capped count, so the difference is
/// accumulated column by column without re-integrating every layer.
double naive_gain_from_field(const Environment& env, const CumulativeVisibility& cumvis,
                             const VisibilityField& field);

/// Horizontal l_p distance in length units between two cell centers.
double cell_distance(const Environment& env, Cell a, Cell b, double p);

double gain_naive(const Environment& env, const CumulativeVisibility& cumvis,
                  const SensorSet& sensors, Cell x, FieldMethod method = FieldMethod::sweep);

/// Distance-weighted gain. Throws ContractError when no sensor is placed yet.
double gain(const Environment& env, const CumulativeVisibility& cumvis, const SensorSet& sensors,
            Cell x, double p = 2.0, FieldMethod method = FieldMethod::sweep);

GainMap gain_map(const Environment& env, const CumulativeVisibility& cumvis,
                 const SensorSet& sensors, GainProvider& provider);

/// Cells whose gain is at least (1 - epsilon) times the maximum valid gain,
/// in row-major order.
std::vector<Cell> selection_pool(const GainMap& gains, double epsilon);

/// Draws the next site from the selection pool. Throws DomainError when the
/// map has no valid cell.
Cell select_next(const GainMap& gains, double epsilon, Rng& rng,
                 TieBreak tie_break = TieBreak::uniform);

enum class PlacementStatus {
  reached,
  /// Maximum gain dropped to zero before the threshold was met.
  stalled,
  budget_exhausted,
};

std::string to_string(PlacementStatus status);

struct StepRecord {
  int index = 0;  // 1-based sensor number
  Cell cell;
  Point3 position;
  double psi_k = 0.0;
  double k_covered = 0.0;
  /// Maximum valid gain of the map the sensor was chosen from; absent for a
  /// first sensor placed without a gain map.
  std::optional<double> max_gain;
  std::size_t pool_size = 0;
  double wall_seconds = 0.0;
};

struct PlacementResult {
  SensorSet sensors;
  std::vector<StepRecord> steps;
  PlacementStatus status = PlacementStatus::reached;
  double free_volume = 0.0;
  /// delta * k * free volume.
  double target = 0.0;
  CumulativeVisibility cumvis;
};

/// Everything a dataset writer needs about one gain-driven step, captured
/// before the chosen sensor is inserted.
struct StepObservation {
  int index = 0;
  const CumulativeVisibility& before;
  const SensorSet& sensors_before;
  const GainMap& gains;
  Cell chosen;
};

using StepRecorder = std::function<void(const StepObservation&)>;

/// Greedy / epsilon-greedy placement loop driven by `provider`.
PlacementResult run_placement(const Environment& env, const PlannerConfig& cfg,
                              GainProvider& provider, const StepRecorder& recorder = {});

/// Convenience overload using an ExactGainProvider built from cfg.
PlacementResult run_placement(const Environment& env, const PlannerConfig& cfg,
                              const StepRecorder& recorder = {});

/// Baseline: after the configured first sensor, candidates are drawn
/// uniformly (with replacement) until the same termination condition.
PlacementResult random_placement(const Environment& env, const PlannerConfig& cfg);

}  // namespace kcover
