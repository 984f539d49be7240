#include <benchmark/benchmark.h>

#include <kcover/datagen.hpp>
#include <kcover/planner.hpp>

namespace {

kcover::Environment urban(int m) {
  kcover::Rng rng(12);
  const kcover::BinaryMask mask = kcover::urban_mask(m, m, rng);
  return kcover::Environment(kcover::flood_fill_heights(mask, rng));
}

// Gain map after one sensor, fresh provider each time so field caching is included.
void BM_GainMap(benchmark::State& state) {
  const auto env = urban(static_cast<int>(state.range(0)));
  kcover::SensorSet sensors;
  sensors.add(env, {0, 0});
  kcover::CumulativeVisibility c(env, 2);
  c.insert(kcover::visibility_field(env, env.mount_point({0, 0})));
  for (auto _ : state) {
    kcover::ExactGainProvider provider(env);
    benchmark::DoNotOptimize(kcover::gain_map(env, c, sensors, provider));
  }
}

// The incremental step the planner repeats: one more layer insertion and psi_k.
void BM_InsertAndPsi(benchmark::State& state) {
  const auto env = urban(static_cast<int>(state.range(0)));
  const auto field = kcover::visibility_field(env, env.mount_point({0, 0}));
  kcover::CumulativeVisibility base(env, 2);
  base.insert(field);
  for (auto _ : state) {
    auto c = base;
    c.insert(field);
    benchmark::DoNotOptimize(kcover::psi_k(env, c));
  }
}

void BM_Placement(benchmark::State& state) {
  const auto env = urban(static_cast<int>(state.range(0)));
  kcover::PlannerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(kcover::run_placement(env, cfg).sensors.size());
}

}  // namespace

BENCHMARK(BM_GainMap)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InsertAndPsi)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Placement)->Arg(32)->Unit(benchmark::kMillisecond)->Iterations(3);
