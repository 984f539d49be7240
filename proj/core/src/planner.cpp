#include "kcover/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "kcover/errors.hpp"
#include "kcover/parallel.hpp"

namespace kcover {

void SensorSet::add(const Environment& env, Cell cell) {
  if (!is_candidate(env, cell)) throw DomainError("sensor site is not a candidate cell");
  sensors_.push_back({cell, env.mount_point(cell)});
}

std::vector<Point3> SensorSet::positions() const {
  std::vector<Point3> out;
  out.reserve(sensors_.size());
  for (const auto& s : sensors_) out.push_back(s.position);
  return out;
}

std::optional<double> GainMap::max_valid() const {
  std::optional<double> best;
  for (std::size_t n = 0; n < values_.size(); ++n)
    if (valid_.values()[n] && (!best || values_.values()[n] > *best)) best = values_.values()[n];
  return best;
}

void PlannerConfig::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in [0, 1)");
  if (!(p >= 1.0)) throw ConfigError("distance norm exponent p must be >= 1");
  if (max_sensors < 0) throw ConfigError("max_sensors must be >= 0");
  if (first.mode == FirstSensor::Mode::by_gain && gain != GainKind::naive)
    throw ConfigError("the distance-weighted gain is undefined without placed sensors; "
                      "fix the first sensor or draw it at random");
}

int PlannerConfig::sensor_cap(const Environment& env) const {
  return max_sensors > 0 ? max_sensors : 4 * k * std::max(env.width(), env.height());
}

double naive_gain_from_field(const Environment& env, const CumulativeVisibility& cumvis,
                             const VisibilityField& field) {
  if (!field.values.same_shape(env.terrain().values()) || cumvis.width() != env.width() ||
      cumvis.height() != env.height())
    throw DomainError("grid dimensions do not match");
  const double z_ceil = env.z_ceil();
  const auto f = env.terrain().values().values();
  const auto g = field.values.values();
  const auto last = cumvis.layer(cumvis.k()).values();
  double total = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double v = std::min(g[n], cumvis.sentinel());
    if (v < last[n])
      total += column_free_above(z_ceil, v, f[n]) - column_free_above(z_ceil, last[n], f[n]);
  }
  return total * env.cell_area();
}

double cell_distance(const Environment& env, Cell a, Cell b, double p) {
  const double dx = std::abs(a.i - b.i) * env.cell_size();
  const double dy = std::abs(a.j - b.j) * env.cell_size();
  if (p == 2.0) return std::hypot(dx, dy);
  if (p == 1.0) return dx + dy;
  if (std::isinf(p)) return std::max(dx, dy);
  return std::pow(std::pow(dx, p) + std::pow(dy, p), 1.0 / p);
}

namespace {

double nearest_sensor_distance(const Environment& env, const SensorSet& sensors, Cell x, double p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : sensors) best = std::min(best, cell_distance(env, x, s.cell, p));
  return best;
}

void require_candidate(const Environment& env, Cell x) {
  if (!is_candidate(env, x)) throw DomainError("gain requested at a cell that is not a sensor site");
}

Cell draw_from_pool(const std::vector<Cell>& pool, Rng& rng, TieBreak tie_break) {
  if (tie_break == TieBreak::lowest_index || pool.size() == 1) return pool.front();
  return pool[uniform_index(rng, pool.size())];
}

}  // namespace

double gain_naive(const Environment& env, const CumulativeVisibility& cumvis,
                  const SensorSet& /*sensors*/, Cell x, FieldMethod method) {
  require_candidate(env, x);
  return naive_gain_from_field(env, cumvis, visibility_field(env, env.mount_point(x), method));
}

double gain(const Environment& env, const CumulativeVisibility& cumvis, const SensorSet& sensors,
            Cell x, double p, FieldMethod method) {
  if (sensors.empty())
    throw ContractError("distance-weighted gain needs at least one placed sensor; "
                        "place the first sensor explicitly");
  require_candidate(env, x);
  const double d = nearest_sensor_distance(env, sensors, x, p);
  return d * gain_naive(env, cumvis, sensors, x, method);
}

struct ExactGainProvider::Cache {
  bool enabled = false;
  bool filled = false;
  std::vector<VisibilityField> fields;
};

ExactGainProvider::ExactGainProvider(const Environment& env, GainKind kind, FieldMethod method,
                                     double p, int jobs, std::size_t cache_bytes)
    : env_(env), kind_(kind), method_(method), p_(p), jobs_(jobs),
      candidates_(candidate_cells(env)), cache_(std::make_unique<Cache>()) {
  const std::size_t per_field =
      static_cast<std::size_t>(env.width()) * static_cast<std::size_t>(env.height()) * sizeof(double);
  cache_->enabled = candidates_.size() * per_field <= cache_bytes;
}

ExactGainProvider::~ExactGainProvider() = default;

GainMap ExactGainProvider::compute(const PlacementState& state) {
  if (&state.env != &env_ && (state.env.width() != env_.width() || state.env.height() != env_.height()))
    throw DomainError("placement state belongs to a different environment");
  if (kind_ == GainKind::distance_weighted && state.sensors.empty())
    throw ContractError("distance-weighted gain needs at least one placed sensor; "
                        "place the first sensor explicitly");

  if (cache_->enabled && !cache_->filled) {
    cache_->fields.resize(candidates_.size());
    parallel_for(candidates_.size(), jobs_, [&](std::size_t n) {
      cache_->fields[n] = visibility_field(env_, env_.mount_point(candidates_[n]), method_);
    });
    cache_->filled = true;
  }

  std::vector<double> values(candidates_.size());
  parallel_for(candidates_.size(), jobs_, [&](std::size_t n) {
    const Cell x = candidates_[n];
    double naive;
    if (cache_->filled) {
      naive = naive_gain_from_field(env_, state.cumvis, cache_->fields[n]);
    } else {
      naive = naive_gain_from_field(env_, state.cumvis,
                                    visibility_field(env_, env_.mount_point(x), method_));
    }
    values[n] = kind_ == GainKind::naive
                    ? naive
                    : nearest_sensor_distance(env_, state.sensors, x, p_) * naive;
  });

  GainMap out(env_.width(), env_.height());
  for (std::size_t n = 0; n < candidates_.size(); ++n) out.set(candidates_[n], values[n]);
  return out;
}

GainMap gain_map(const Environment& env, const CumulativeVisibility& cumvis,
                 const SensorSet& sensors, GainProvider& provider) {
  return provider.compute(PlacementState{env, cumvis, sensors});
}

std::vector<Cell> selection_pool(const GainMap& gains, double epsilon) {
  const auto best = gains.max_valid();
  if (!best) throw DomainError("gain map has no valid cell");
  const double threshold = (1.0 - epsilon) * *best;
  std::vector<Cell> pool;
  for (int j = 0; j < gains.height(); ++j)
    for (int i = 0; i < gains.width(); ++i)
      if (gains.valid({i, j}) && gains[{i, j}] >= threshold) pool.push_back({i, j});
  return pool;
}

Cell select_next(const GainMap& gains, double epsilon, Rng& rng, TieBreak tie_break) {
  return draw_from_pool(selection_pool(gains, epsilon), rng, tie_break);
}

std::string to_string(PlacementStatus status) {
  switch (status) {
    case PlacementStatus::reached: return "reached";
    case PlacementStatus::stalled: return "unreachable-threshold";
    case PlacementStatus::budget_exhausted: return "budget-exhausted";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

class PlacementRun {
 public:
  PlacementRun(const Environment& env, const PlannerConfig& cfg)
      : env_(env), cfg_(cfg), rng_(cfg.seed),
        result_{SensorSet{}, {}, PlacementStatus::reached, free_volume(env), 0.0,
                CumulativeVisibility(env, cfg.k)} {
    cfg_.validate();
    candidates_ = candidate_cells(env_);
    result_.target = cfg_.delta * cfg_.k * result_.free_volume;
  }

  Rng& rng() { return rng_; }
  const std::vector<Cell>& candidates() const { return candidates_; }
  PlacementResult& result() { return result_; }
  bool reached() const { return psi_ >= result_.target; }
  bool at_cap() const { return static_cast<int>(result_.sensors.size()) >= cfg_.sensor_cap(env_); }
  PlacementState state() const { return {env_, result_.cumvis, result_.sensors}; }

  Cell fixed_or_random_first() {
    if (cfg_.first.mode == FirstSensor::Mode::fixed) {
      if (!is_candidate(env_, cfg_.first.cell))
        throw ConfigError("first sensor cell (" + std::to_string(cfg_.first.cell.i) + "," +
                          std::to_string(cfg_.first.cell.j) + ") is not a legal sensor site");
      return cfg_.first.cell;
    }
    return candidates_[uniform_index(rng_, candidates_.size())];
  }

  void place(Cell cell, std::optional<double> max_gain, std::size_t pool, Clock::time_point started) {
    result_.cumvis.insert(visibility_field(env_, env_.mount_point(cell), cfg_.field_method));
    result_.sensors.add(env_, cell);
    psi_ = psi_k(env_, result_.cumvis);
    StepRecord rec;
    rec.index = static_cast<int>(result_.sensors.size());
    rec.cell = cell;
    rec.position = env_.mount_point(cell);
    rec.psi_k = psi_;
    rec.k_covered = k_covered_volume(env_, result_.cumvis);
    rec.max_gain = max_gain;
    rec.pool_size = pool;
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
    result_.steps.push_back(rec);
  }

  // One gain-driven step; returns false when the run stalls.
  bool gain_step(GainProvider& provider, const StepRecorder& recorder) {
    const auto started = Clock::now();
    const GainMap gains = provider.compute(state());
    const auto best = gains.max_valid();
    if (!best || !(*best > 0.0)) {
      result_.status = PlacementStatus::stalled;
      return false;
    }
    const std::vector<Cell> pool = selection_pool(gains, cfg_.epsilon);
    const Cell chosen = draw_from_pool(pool, rng_, cfg_.tie_break);
    if (recorder) {
      recorder(StepObservation{static_cast<int>(result_.sensors.size()) + 1, result_.cumvis,
                               result_.sensors, gains, chosen});
    }
    place(chosen, best, pool.size(), started);
    return true;
  }

 private:
  const Environment& env_;
  PlannerConfig cfg_;
  Rng rng_;
  std::vector<Cell> candidates_;
  PlacementResult result_;
  double psi_ = 0.0;
};

}  // namespace

PlacementResult run_placement(const Environment& env, const PlannerConfig& cfg,
                              GainProvider& provider, const StepRecorder& recorder) {
  PlacementRun run(env, cfg);
  if (cfg.first.mode == FirstSensor::Mode::by_gain) {
    if (!run.gain_step(provider, recorder)) return std::move(run.result());
  } else {
    const auto started = Clock::now();
    run.place(run.fixed_or_random_first(), std::nullopt, 1, started);
  }
  while (!run.reached()) {
    if (run.at_cap()) {
      run.result().status = PlacementStatus::budget_exhausted;
      return std::move(run.result());
    }
    if (!run.gain_step(provider, recorder)) return std::move(run.result());
  }
  run.result().status = PlacementStatus::reached;
  return std::move(run.result());
}

PlacementResult run_placement(const Environment& env, const PlannerConfig& cfg,
                              const StepRecorder& recorder) {
  cfg.validate();
  ExactGainProvider provider(env, cfg.gain, cfg.field_method, cfg.p, cfg.jobs);
  return run_placement(env, cfg, provider, recorder);
}

PlacementResult random_placement(const Environment& env, const PlannerConfig& cfg) {
  if (cfg.first.mode == FirstSensor::Mode::by_gain)
    throw ConfigError("random placement has no gain map to choose the first sensor from");
  PlacementRun run(env, cfg);
  run.place(run.fixed_or_random_first(), std::nullopt, 1, Clock::now());
  while (!run.reached()) {
    if (run.at_cap()) {
      run.result().status = PlacementStatus::budget_exhausted;
      return std::move(run.result());
    }
    const auto started = Clock::now();
    const auto& pool = run.candidates();
    run.place(pool[uniform_index(run.rng(), pool.size())], std::nullopt, pool.size(), started);
  }
  run.result().status = PlacementStatus::reached;
  return std::move(run.result());
}

}  // namespace kcover
