#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <kcover/datagen.hpp>
#include <kcover/planner.hpp>

namespace kcover::cli {

struct BenchmarkOptions {
  int maps = 20;
  int grid = 64;
  /// k, delta, epsilon, field method and gain kind; first sensor and seed are
  /// set per map.
  PlannerConfig planner;
  std::uint64_t seed = 0;
  /// Shell command of a gain provider; the surrogate strategy runs when set.
  std::optional<std::string> surrogate;
  /// Footprint masks to crop from; empty means procedural urban maps.
  std::vector<MaskSource> sources;
  EnvironmentParams env;
  int jobs = 0;
};

struct StrategyRun {
  int sensors = 0;
  std::string status;  // placement status, or "error"
  std::string error;
};

struct MapRuns {
  int map_id = 0;
  std::uint64_t seed = 0;
  Cell first;
  double free_volume = 0.0;
  std::vector<StrategyRun> runs;  // aligned with BenchmarkReport::strategies
};

struct SignTest {
  int wins = 0;    // maps where greedy used fewer sensors
  int losses = 0;  // maps where greedy used more
  int ties = 0;
  /// One-sided P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
  double p_value = 1.0;
};

struct BenchmarkReport {
  std::vector<std::string> strategies;
  std::vector<MapRuns> maps;
  SignTest greedy_vs_random;

  /// Sensor counts of maps where `strategy` finished without error.
  std::vector<int> counts(std::size_t strategy) const;
  double mean(std::size_t strategy) const;
};

/// One-sided binomial sign test p-value.
double sign_test_p(int wins, int losses);

/// Runs every strategy on every map with identical per-map first sensors.
/// A failing run is recorded and the benchmark continues.
BenchmarkReport run_benchmark(const BenchmarkOptions& opts);

std::string benchmark_to_json(const BenchmarkReport& report, const std::string& config_json);

/// Overlaid sensor-count histograms, one color per strategy.
void write_histogram(const std::filesystem::path& path, const BenchmarkReport& report);

}  // namespace kcover::cli
