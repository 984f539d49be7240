#include <doctest.h>

#include <kcover/errors.hpp>
#include <kcover/visibility.hpp>

#include "oracles.hpp"

using namespace kcover;

namespace {

// 1D profile [0, 0, 0.5, 0, 0] along x, one row deep copies so the walk stays in row 0.
Environment wall_profile(double z_ceil) {
  Grid<double> f(5, 2, 0.0);
  f(2, 0) = 0.5;
  f(2, 1) = 0.5;
  return Environment(HeightField(std::move(f)), {z_ceil});
}

}  // namespace

TEST_CASE("line_of_sight: flat terrain sees everything") {
  const Environment env(flat_heightfield(10, 10));
  std::mt19937_64 rng(4);
  for (int n = 0; n < 200; ++n) {
    const Point3 a = oracle::random_free_point(env, rng);
    const Point3 b = oracle::random_free_point(env, rng);
    CHECK(line_of_sight(env, a, b));
  }
}

TEST_CASE("line_of_sight: wall blocks a low segment") {
  const Environment env = wall_profile(1.0);
  CHECK_FALSE(line_of_sight(env, {0.5, 0.5, 0.1}, {4.5, 0.5, 0.1}));
}

TEST_CASE("line_of_sight: governing corner at the near wall edge") {
  // Needs a ceiling above the critical altitude 0.1 + 0.4 * 4 / 1.5.
  const Environment env = wall_profile(2.0);
  const double critical = 0.1 + 0.4 * (4.0 / 1.5);
  CHECK(critical == doctest::Approx(1.1667).epsilon(1e-4));
  for (double z : {1.0, 1.15, critical - 1e-9, critical + 1e-9, 1.17, 1.3, 1.9}) {
    const Point3 a{0.5, 0.5, 0.1};
    const Point3 b{4.5, 0.5, z};
    INFO("z = " << z);
    CHECK(line_of_sight(env, a, b) == (z > critical));
    if (std::abs(z - critical) > 1e-6) CHECK(oracle::los_sampled(env, a, b) == (z > critical));
  }
  // Exactly grazing the corner counts as blocked.
  // 0.25 + 0.25 * 1.5 / 1.5 reaches 0.5 at x = 2 with no rounding.
  CHECK_FALSE(line_of_sight(env, {0.5, 0.5, 0.25}, {3.5, 0.5, 0.75}));
  CHECK(line_of_sight(env, {0.5, 0.5, 0.25}, {3.5, 0.5, 0.7500001}));
}

TEST_CASE("line_of_sight: endpoints must be free") {
  const Environment env = wall_profile(1.0);
  CHECK_THROWS_AS(line_of_sight(env, {2.5, 0.5, 0.3}, {0.5, 0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(line_of_sight(env, {0.5, 0.5, 0.0}, {0.5, 1.5, 0.5}), DomainError);
}

TEST_CASE("line_of_sight: corner crossings check both side cells") {
  // Diagonal through the shared corner of (1,1), (2,1), (1,2), (2,2).
  Grid<double> f(4, 4, 0.0);
  f(2, 1) = 0.9;
  const Environment env(HeightField(std::move(f)));
  CHECK_FALSE(line_of_sight(env, {0.5, 0.5, 0.1}, {3.5, 3.5, 0.1}));
  CHECK(line_of_sight(env, {0.5, 0.5, 0.95}, {3.5, 3.5, 0.95}));
}

TEST_CASE("line_of_sight agrees with dense sampling and is symmetric") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Environment env = oracle::random_blocks(24, seed);
    std::mt19937_64 rng(seed + 100);
    int disagreements = 0;
    for (int n = 0; n < 400; ++n) {
      const Point3 a = oracle::random_free_point(env, rng);
      const Point3 b = oracle::random_free_point(env, rng);
      const bool exact = line_of_sight(env, a, b);
      CHECK(exact == line_of_sight(env, b, a));
      // Sampling can only miss a blocking sliver, never invent one.
      if (exact != oracle::los_sampled(env, a, b, 1.0 / 256)) {
        CHECK_FALSE(exact);
        ++disagreements;
      }
    }
    CHECK(disagreements <= 2);
  }
}

TEST_CASE("visibility_field: flat terrain") {
  const Environment env(flat_heightfield(12, 9));
  for (auto method : {FieldMethod::exact, FieldMethod::sweep}) {
    const auto field = visibility_field(env, env.mount_point({3, 7}), method);
    for (double v : field.values.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("visibility_field: profile example clamps to the sentinel") {
  const Environment env = wall_profile(1.0);
  const auto exact = visibility_field_exact(env, {0.5, 0.5, 0.1});
  CHECK(exact.values(4, 0) == 1.0);
  const auto tall = visibility_field_exact(wall_profile(2.0), {0.5, 0.5, 0.1});
  CHECK(tall.values(4, 0) == doctest::Approx(0.1 + 0.4 * 4.0 / 1.5).epsilon(1e-12));
  CHECK(tall.values(3, 0) == doctest::Approx(0.1 + 0.4 * 3.0 / 1.5).epsilon(1e-12));
}

TEST_CASE("visibility_field: invariants against the line-of-sight oracle") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Environment env = oracle::random_blocks(20, seed);
    std::mt19937_64 rng(seed);
    const auto cells = candidate_cells(env);
    for (int s = 0; s < 3; ++s) {
      const Cell home = cells[rng() % cells.size()];
      const Point3 sensor = env.mount_point(home);
      const auto g = visibility_field_exact(env, sensor);
      CHECK(g.values[home] <= sensor.z);
      for (int j = 0; j < env.height(); ++j)
        for (int i = 0; i < env.width(); ++i) {
          const double v = g.values(i, j);
          const double f = env.height_at({i, j});
          CHECK((v >= f || v == env.z_ceil()));
          CHECK(v >= 0.0);
          CHECK(v <= env.z_ceil());
          // just above / just below the stored altitude
          const Point3 center = env.cell_center({i, j}, 0.0);
          const double above = v + 1e-7;
          if (above < env.z_ceil())
            CHECK(line_of_sight(env, sensor, {center.x, center.y, above}));
          const double below = v - 1e-7;
          if (below > f && v < env.z_ceil())
            CHECK_FALSE(line_of_sight(env, sensor, {center.x, center.y, below}));
        }
    }
  }
}

TEST_CASE("visibility_field: sensor must be free") {
  Grid<double> f(4, 4, 0.0);
  f(1, 1) = 0.5;
  const Environment env(HeightField(std::move(f)));
  CHECK_THROWS_AS(visibility_field_exact(env, {1.5, 1.5, 0.2}), DomainError);
  CHECK_THROWS_AS(visibility_field_sweep(env, {1.5, 1.5, 0.2}), DomainError);
}

TEST_CASE("sweep tracks the exact field") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Environment env = oracle::random_blocks(32, seed * 31 + 5);
    std::mt19937_64 rng(seed);
    const auto cells = candidate_cells(env);
    const Point3 sensor = env.mount_point(cells[rng() % cells.size()]);
    const auto a = visibility_field_exact(env, sensor);
    const auto b = visibility_field_sweep(env, sensor);
    int close = 0;
    for (std::size_t n = 0; n < a.values.values().size(); ++n)
      close += std::abs(a.values.values()[n] - b.values.values()[n]) <= 0.02 * env.z_ceil();
    CHECK(close >= 0.95 * static_cast<double>(a.values.values().size()));
    CHECK(std::abs(visible_volume(env, a) - visible_volume(env, b)) <= 0.01 * free_volume(env));
  }
}

TEST_CASE("order_of_visibility") {
  const Environment flat(flat_heightfield(8, 8));
  const std::vector<Point3> three{flat.mount_point({0, 0}), flat.mount_point({5, 2}), flat.mount_point({5, 2})};
  CHECK(order_of_visibility(flat, three, {3.3, 6.1, 0.4}) == 3);
  CHECK(order_of_visibility(flat, {}, {3.3, 6.1, 0.4}) == 0);

  Grid<double> f(8, 8, 0.0);
  for (int j = 0; j < 8; ++j) f(4, j) = 0.8;
  const Environment walled(HeightField(std::move(f)));
  const std::vector<Point3> left{walled.mount_point({0, 0}), walled.mount_point({1, 6}), walled.mount_point({3, 3})};
  const Point3 behind{6.5, 4.5, 0.1};
  CHECK(order_of_visibility(walled, left, behind) == 0);
  CHECK_THROWS_AS(order_of_visibility(walled, left, {4.5, 4.5, 0.5}), DomainError);

  const Environment env = oracle::random_blocks(16, 11);
  std::mt19937_64 rng(9);
  std::vector<Point3> sensors;
  const auto cells = candidate_cells(env);
  for (int s = 0; s < 4; ++s) sensors.push_back(env.mount_point(cells[rng() % cells.size()]));
  std::vector<VisibilityField> fields;
  for (const auto& s : sensors) fields.push_back(visibility_field_exact(env, s));
  for (int n = 0; n < 300; ++n) {
    const Point3 y = oracle::random_free_point(env, rng);
    int direct = 0;
    for (const auto& s : sensors) direct += line_of_sight(env, s, y);
    CHECK(order_of_visibility(env, sensors, y) == direct);
    // same count from the fields at a cell center
    const Cell c = env.cell_of(y.x, y.y);
    const Point3 center = env.cell_center(c, y.z);
    int from_fields = 0;
    int by_los = 0;
    for (std::size_t s = 0; s < sensors.size(); ++s) {
      from_fields += fields[s].values[c] < center.z;
      by_los += line_of_sight(env, sensors[s], center);
    }
    CHECK(from_fields == by_los);
  }
}
