#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kcover/coverage.hpp"
#include "kcover/envmodel.hpp"
#include "kcover/planner.hpp"
#include "kcover/rng.hpp"

namespace kcover {

/// Parameters of the procedural city-block footprint generator.
struct UrbanParams {
  int min_block = 6;
  int max_block = 16;
  int min_street = 1;
  int max_street = 3;
  /// Probability that a block lot stays empty (plaza, park).
  double empty_lot = 0.2;
  /// Building footprint side lengths are drawn from [min_building, block side].
  int min_building = 2;
  int buildings_per_block = 3;
};

/// City-like footprint raster: a street grid whose blocks hold a few
/// rectangular buildings. Row 0 and column 0 are always street.
BinaryMask urban_mask(int width, int height, Rng& rng, const UrbanParams& params = {});

/// Assigns every 4-connected building component one height drawn uniformly
/// from (h_min, h_max); background cells get 0. Components are labeled in
/// row-major order of their first cell, which fixes the draw order.
HeightField flood_fill_heights(const BinaryMask& mask, Rng& rng, double h_min = 0.1,
                               double h_max = 0.9, double cell_size = 1.0);

struct Crop {
  BinaryMask mask;
  int offset_x = 0;
  int offset_y = 0;
};

/// Uniformly positioned size x size window of `source`.
Crop random_crop(const BinaryMask& source, int size, Rng& rng);

struct MaskSource {
  std::string id;
  BinaryMask mask;
};

struct SampleMeta {
  int map_id = 0;
  int step = 0;  // 1-based index of the sensor this sample's gain map chose
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  Cell chosen;
  std::string origin;  // dataset a merged sample came from; empty otherwise
};

struct RunRecord {
  int map_id = 0;
  std::uint64_t seed = 0;
  std::string source;
  int crop_x = 0;
  int crop_y = 0;
  Cell first_sensor;
  int sensors = 0;
  std::string status;
  std::size_t first_sample = 0;
  std::size_t length = 0;
  /// False when the dataset was cut off inside this run.
  bool complete = true;
};

struct DatasetManifest {
  std::size_t count = 0;
  int width = 0;
  int height = 0;
  int k = 0;
  /// Distinct epsilon values present, ascending.
  std::vector<double> epsilons;
  std::uint64_t seed = 0;
  std::vector<std::string> sources;
  std::vector<RunRecord> runs;
  std::vector<SampleMeta> samples;
  /// Generator settings echoed verbatim (JSON text).
  std::string generator;

  std::vector<std::string> channel_names() const;
  std::size_t floats_per_sample() const {
    return static_cast<std::size_t>(k + 2) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(height);
  }
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);

/// One training pair: normalized terrain, k normalized cumulative layers, and
/// the gain map scaled so its maximum is 1 (an all-zero map stays zero).
struct Sample {
  int width = 0;
  int height = 0;
  int k = 0;
  std::vector<float> obs;
  std::vector<float> cumvis;  // k layers back to back
  std::vector<float> gain;
  SampleMeta meta;

  std::span<const float> layer(int l) const;  // 1-based
  /// All channels in container order: obs, c1..ck, gain.
  std::vector<float> flatten() const;
};

Sample make_sample(const Environment& env, const CumulativeVisibility& before, const GainMap& gains,
                   SampleMeta meta);

struct GenerateOptions {
  std::size_t count = 0;
  int grid = 128;
  /// The first sensor is always drawn at random; cfg.first is ignored.
  PlannerConfig planner;
  std::uint64_t seed = 0;
  double h_min = 0.1;
  double h_max = 0.9;
  EnvironmentParams env;
  int jobs = 0;
};

/// Runs recorded placements on cropped, heighted footprint maps until
/// `count` samples exist, writing the container to `out`. On failure the
/// files written so far are removed and the error is rethrown.
DatasetManifest generate_dataset(std::span<const MaskSource> sources, const GenerateOptions& opts,
                                 const std::filesystem::path& out);

struct MergePart {
  std::filesystem::path dir;
  std::size_t take = 0;
};

/// Concatenates the first `take` samples of each part, in part order.
DatasetManifest merge_datasets(std::span<const MergePart> parts, const std::filesystem::path& out);

class DatasetReader {
 public:
  explicit DatasetReader(std::filesystem::path dir);

  const DatasetManifest& manifest() const noexcept { return manifest_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::size_t size() const noexcept { return manifest_.count; }

  Sample read(std::size_t index) const;
  std::filesystem::path sample_path(std::size_t index) const;

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
};

std::string sample_file_name(std::size_t index);
void write_sample_file(const std::filesystem::path& path, const Sample& sample);

}  // namespace kcover
