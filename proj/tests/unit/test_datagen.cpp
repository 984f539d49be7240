#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include <kcover/datagen.hpp>
#include <kcover/errors.hpp>

#include "oracles.hpp"

using namespace kcover;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::vector<MaskSource> one_source(int size, std::uint64_t seed) {
  Rng rng(seed);
  return {{"urban:" + std::to_string(size), urban_mask(size, size, rng)}};
}

GenerateOptions small_options(std::size_t n, double epsilon, int jobs = 1) {
  GenerateOptions o;
  o.count = n;
  o.grid = 16;
  o.seed = 12;
  o.planner.epsilon = epsilon;
  o.jobs = jobs;
  return o;
}

}  // namespace

TEST_CASE("flood_fill_heights: one height per component") {
  BinaryMask mask(10, 10, 0);
  for (int j = 1; j < 4; ++j)
    for (int i = 1; i < 5; ++i) mask(i, j) = 1;
  for (int j = 6; j < 9; ++j)
    for (int i = 5; i < 9; ++i) mask(i, j) = 1;
  Rng rng(3);
  const HeightField h = flood_fill_heights(mask, rng);
  std::set<double> levels;
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i) {
      if (mask(i, j)) {
        levels.insert(h[{i, j}]);
        CHECK(h[{i, j}] > 0.1);
        CHECK(h[{i, j}] < 0.9);
      } else {
        CHECK(h[{i, j}] == 0.0);
      }
    }
  CHECK(levels.size() == 2);
  CHECK(h[{1, 1}] == h[{4, 3}]);

  Rng rng2(3);
  const HeightField flat = flood_fill_heights(BinaryMask(6, 6, 0), rng2);
  for (double v : flat.values().values()) CHECK(v == 0.0);
}

TEST_CASE("flood_fill_heights: component count is preserved") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const BinaryMask mask = urban_mask(48, 48, rng);
    const HeightField h = flood_fill_heights(mask, rng);
    const int in = oracle::count_components(mask, [](std::uint8_t v) { return v != 0; });
    const int out = oracle::count_components(h.values(), [](double v) { return v > 0.0; });
    CHECK(in == out);
    CHECK(in > 0);
  }
}

TEST_CASE("urban_mask keeps row 0 and column 0 clear") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const BinaryMask m = urban_mask(40, 30, rng);
    for (int i = 0; i < 40; ++i) CHECK(m(i, 0) == 0);
    for (int j = 0; j < 30; ++j) CHECK(m(0, j) == 0);
  }
}

TEST_CASE("random_crop") {
  Rng rng(1);
  const BinaryMask src = urban_mask(50, 40, rng);
  Rng a(9);
  const Crop same = random_crop(src, 40, a);
  CHECK(same.offset_y == 0);
  Rng full(9);
  BinaryMask square(30, 30, 0);
  square(3, 4) = 1;
  CHECK(random_crop(square, 30, full).mask == square);

  Rng r1(5);
  Rng r2(5);
  const Crop c1 = random_crop(src, 16, r1);
  const Crop c2 = random_crop(src, 16, r2);
  CHECK(c1.mask == c2.mask);
  CHECK(c1.offset_x == c2.offset_x);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) CHECK(c1.mask(i, j) == src(c1.offset_x + i, c1.offset_y + j));

  Rng r3(5);
  CHECK_THROWS_AS(random_crop(src, 41, r3), DomainError);
}

TEST_CASE("manifest JSON round trip") {
  DatasetManifest m;
  m.count = 2;
  m.width = 4;
  m.height = 4;
  m.k = 2;
  m.epsilons = {0.0, 0.05};
  m.seed = 18446744073709551557ull;
  m.sources = {"a.png"};
  m.generator = R"({"grid":4})";
  RunRecord r;
  r.map_id = 3;
  r.length = 2;
  r.first_sensor = {1, 2};
  r.complete = false;
  r.status = "reached";
  m.runs.push_back(r);
  for (int n = 0; n < 2; ++n) {
    SampleMeta s;
    s.map_id = 3;
    s.step = n + 2;
    s.epsilon = 0.05;
    s.chosen = {n, 1};
    m.samples.push_back(s);
  }
  const std::string text = manifest_to_json(m);
  const DatasetManifest back = manifest_from_json(text);
  CHECK(manifest_to_json(back) == text);
  CHECK(back.seed == m.seed);
  CHECK(back.channel_names() == std::vector<std::string>{"obs", "c1", "c2", "gain"});
  CHECK(back.floats_per_sample() == 4 * 16);
  CHECK_FALSE(back.runs[0].complete);
}

TEST_CASE("generated datasets satisfy the sample invariants") {
  TempDir dir("kcover_gen_eps0");
  const auto sources = one_source(64, 1);
  const DatasetManifest m = generate_dataset(sources, small_options(40, 0.0), dir.path);
  CHECK(m.count == 40);
  CHECK(fs::exists(dir.path / "manifest.json"));
  const DatasetReader reader(dir.path);
  CHECK(reader.size() == 40);
  CHECK(reader.manifest().epsilons == std::vector<double>{0.0});

  std::size_t total = 0;
  for (const RunRecord& run : reader.manifest().runs) {
    std::vector<float> obs0;
    for (std::size_t n = run.first_sample; n < run.first_sample + run.length; ++n) {
      const Sample s = reader.read(n);
      ++total;
      CHECK(s.meta.map_id == run.map_id);
      for (float v : s.flatten()) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
      }
      const float peak = *std::max_element(s.gain.begin(), s.gain.end());
      CHECK((peak == 1.0f || peak == 0.0f));
      const std::size_t chosen = static_cast<std::size_t>(s.meta.chosen.j) * 16 + static_cast<std::size_t>(s.meta.chosen.i);
      CHECK(s.gain[chosen] == peak);
      if (obs0.empty()) obs0 = s.obs;
      CHECK(s.obs == obs0);
      // layers are ordered
      for (std::size_t c = 0; c < s.obs.size(); ++c) CHECK(s.layer(1)[c] <= s.layer(2)[c]);
      CHECK(s.meta.step >= 2);
    }
  }
  CHECK(total == 40);
  // only the last run can be cut short
  for (std::size_t r = 0; r + 1 < reader.manifest().runs.size(); ++r) CHECK(reader.manifest().runs[r].complete);
}

TEST_CASE("container round trip is bitwise") {
  TempDir dir("kcover_gen_rt");
  const auto sources = one_source(48, 2);
  generate_dataset(sources, small_options(12, 0.05), dir.path);
  const DatasetReader reader(dir.path);
  for (std::size_t n = 0; n < reader.size(); ++n) {
    const Sample s = reader.read(n);
    const fs::path copy = dir.path / "copy.bin";
    write_sample_file(copy, s);
    CHECK(slurp(copy) == slurp(reader.sample_path(n)));
    CHECK(fs::file_size(copy) == reader.manifest().floats_per_sample() * 4);
  }
}

TEST_CASE("generation does not depend on the worker count") {
  TempDir a("kcover_gen_j1");
  TempDir b("kcover_gen_j3");
  const auto sources = one_source(64, 3);
  generate_dataset(sources, small_options(25, 0.05, 1), a.path);
  generate_dataset(sources, small_options(25, 0.05, 3), b.path);
  CHECK(slurp(a.path / "manifest.json") == slurp(b.path / "manifest.json"));
  for (std::size_t n = 0; n < 25; ++n)
    CHECK(slurp(a.path / "samples" / sample_file_name(n)) == slurp(b.path / "samples" / sample_file_name(n)));
}

TEST_CASE("merge takes prefixes and records the mix") {
  TempDir a("kcover_merge_a");
  TempDir b("kcover_merge_b");
  TempDir out("kcover_merge_out");
  const auto sources = one_source(64, 4);
  generate_dataset(sources, small_options(20, 0.0), a.path);
  auto eps = small_options(15, 0.05);
  eps.seed = 99;
  generate_dataset(sources, eps, b.path);
  const std::vector<MergePart> parts{{a.path, 12}, {b.path, 7}};
  const DatasetManifest m = merge_datasets(parts, out.path);
  CHECK(m.count == 19);
  CHECK(m.epsilons == std::vector<double>{0.0, 0.05});
  const DatasetReader merged(out.path);
  CHECK(merged.size() == 19);
  CHECK(slurp(merged.sample_path(0)) == slurp(a.path / "samples" / sample_file_name(0)));
  CHECK(slurp(merged.sample_path(12)) == slurp(b.path / "samples" / sample_file_name(0)));
  CHECK(slurp(merged.sample_path(18)) == slurp(b.path / "samples" / sample_file_name(6)));
  CHECK(merged.manifest().generator.find("\"take\":7") != std::string::npos);
  std::set<int> maps_a;
  std::set<int> maps_b;
  for (std::size_t n = 0; n < 19; ++n) (n < 12 ? maps_a : maps_b).insert(merged.manifest().samples[n].map_id);
  for (int id : maps_b) CHECK(maps_a.count(id) == 0);

  TempDir bad("kcover_merge_bad");
  const std::vector<MergePart> too_many{{a.path, 21}};
  CHECK_THROWS_AS(merge_datasets(too_many, bad.path), ConfigError);
  CHECK_FALSE(fs::exists(bad.path / "manifest.json"));
}

TEST_CASE("failed generation leaves nothing behind") {
  TempDir dir("kcover_gen_fail");
  const std::vector<MaskSource> solid{{"solid", BinaryMask(20, 20, 1)}};
  CHECK_THROWS_AS(generate_dataset(solid, small_options(5, 0.0), dir.path), ConfigError);
  CHECK_FALSE(fs::exists(dir.path));
}
