#include <doctest.h>

#include <algorithm>
#include <numeric>

#include <kcover/coverage.hpp>
#include <kcover/errors.hpp>

#include "oracles.hpp"

using namespace kcover;

namespace {

VisibilityField constant_field(int w, int h, double v) { return {{0.5, 0.5, 0.1}, Grid<double>(w, h, v)}; }

std::vector<Point3> random_sensors(const Environment& env, int n, std::mt19937_64& rng) {
  const auto cells = candidate_cells(env);
  std::vector<Point3> out;
  for (int s = 0; s < n; ++s) out.push_back(env.mount_point(cells[rng() % cells.size()]));
  return out;
}

}  // namespace

TEST_CASE("update_cumvis: sorted insertion truncated at k") {
  CumulativeVisibility c(1, 1, 2, 1.0);
  c = update_cumvis(c, constant_field(1, 1, 0.4));
  CHECK(c.at(1, {0, 0}) == 0.4);
  CHECK(c.at(2, {0, 0}) == 1.0);

  CumulativeVisibility d(1, 1, 2, 1.0);
  d.insert(constant_field(1, 1, 0.2));
  d.insert(constant_field(1, 1, 0.5));
  d = update_cumvis(d, constant_field(1, 1, 0.3));
  CHECK(d.at(1, {0, 0}) == 0.2);
  CHECK(d.at(2, {0, 0}) == 0.3);
  CHECK(d.sensor_count() == 3);
}

TEST_CASE("update_cumvis: errors") {
  CumulativeVisibility c(4, 4, 2, 1.0);
  CHECK_THROWS_AS(c.insert(constant_field(4, 5, 0.1)), DomainError);
  CHECK_THROWS_AS(c.layer(0), DomainError);
  CHECK_THROWS_AS(c.layer(3), DomainError);
}

TEST_CASE("incremental layers equal the from-scratch sort, in any order") {
  const Environment env = oracle::random_blocks(16, 2);
  std::mt19937_64 rng(5);
  const auto sensors = random_sensors(env, 7, rng);
  std::vector<VisibilityField> fields;
  std::vector<Grid<double>> raw;
  for (const auto& s : sensors) {
    fields.push_back(visibility_field_exact(env, s));
    raw.push_back(fields.back().values);
  }
  for (int k : {1, 2, 3, 8}) {
    const auto expected = oracle::cumvis_from_scratch(raw, k, 16, 16, env.z_ceil());
    std::vector<std::size_t> order(fields.size());
    std::iota(order.begin(), order.end(), 0);
    for (int trial = 0; trial < 10; ++trial) {
      std::shuffle(order.begin(), order.end(), rng);
      CumulativeVisibility c(env, k);
      for (auto n : order) c.insert(fields[n]);
      for (int l = 1; l <= k; ++l) CHECK(c.layer(l) == expected[static_cast<std::size_t>(l - 1)]);
    }
  }
}

TEST_CASE("psi_k and k_covered_volume: closed forms on empty terrain") {
  const Environment env(flat_heightfield(8, 8));
  const double v = free_volume(env);
  CumulativeVisibility c(env, 2);
  CHECK(psi_k(env, c) == 0.0);
  c.insert(visibility_field_exact(env, env.mount_point({1, 1})));
  CHECK(psi_k(env, c) == doctest::Approx(v).epsilon(1e-15));
  CHECK(k_covered_volume(env, c) == 0.0);
  c.insert(visibility_field_exact(env, env.mount_point({1, 1})));
  CHECK(psi_k(env, c) == doctest::Approx(2 * v).epsilon(1e-15));
  CHECK(k_covered_volume(env, c) == doctest::Approx(v).epsilon(1e-15));
}

TEST_CASE("psi_k and k_covered_volume match voxel integration") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Environment env = oracle::random_blocks(12, seed + 40);
    std::mt19937_64 rng(seed);
    const auto sensors = random_sensors(env, 3, rng);
    CumulativeVisibility c(env, 2);
    for (const auto& s : sensors) c.insert(visibility_field_exact(env, s));
    const auto voxel = oracle::voxel_coverage(env, sensors, 2, 256, [&](const Point3& a, const Point3& b) {
      return line_of_sight(env, a, b);
    });
    CHECK(psi_k(env, c) == doctest::Approx(voxel.psi).epsilon(0.005));
    if (voxel.k_covered > 0) CHECK(k_covered_volume(env, c) == doctest::Approx(voxel.k_covered).epsilon(0.005));
  }
}

TEST_CASE("coverage bounds and monotonicity") {
  const Environment env = oracle::random_blocks(16, 8);
  std::mt19937_64 rng(3);
  const double v = free_volume(env);
  for (int k : {1, 2, 3}) {
    CumulativeVisibility c(env, k);
    double psi = 0.0;
    double kc = 0.0;
    for (const auto& s : random_sensors(env, 6, rng)) {
      c.insert(visibility_field_sweep(env, s));
      const double psi2 = psi_k(env, c);
      const double kc2 = k_covered_volume(env, c);
      CHECK(psi2 >= psi);
      CHECK(kc2 >= kc);
      CHECK(psi2 <= k * v * (1 + 1e-12));
      CHECK(kc2 <= v * (1 + 1e-12));
      CHECK(k * kc2 <= psi2 * (1 + 1e-12));
      psi = psi2;
      kc = kc2;
    }
  }
}

TEST_CASE("psi_1 is the union of viewsheds") {
  const Environment env = oracle::random_blocks(16, 21);
  std::mt19937_64 rng(8);
  CumulativeVisibility c(env, 1);
  Grid<double> lowest(16, 16, env.z_ceil());
  for (const auto& s : random_sensors(env, 4, rng)) {
    const auto g = visibility_field_exact(env, s);
    c.insert(g);
    for (std::size_t n = 0; n < lowest.values().size(); ++n)
      lowest.values()[n] = std::min(lowest.values()[n], g.values.values()[n]);
  }
  double union_volume = 0.0;
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i)
      union_volume += column_free_above(env.z_ceil(), lowest(i, j), env.height_at({i, j})) * env.cell_area();
  CHECK(psi_k(env, c) == union_volume);
}
