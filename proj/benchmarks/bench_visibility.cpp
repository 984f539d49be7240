#include <benchmark/benchmark.h>

#include <kcover/datagen.hpp>
#include <kcover/visibility.hpp>

namespace {

kcover::Environment urban(int m) {
  kcover::Rng rng(11);
  const kcover::BinaryMask mask = kcover::urban_mask(m, m, rng);
  return kcover::Environment(kcover::flood_fill_heights(mask, rng));
}

void field(benchmark::State& state, kcover::FieldMethod method) {
  const auto env = urban(static_cast<int>(state.range(0)));
  const auto sensor = env.mount_point({0, 0});
  for (auto _ : state) benchmark::DoNotOptimize(kcover::visibility_field(env, sensor, method));
  state.SetComplexityN(state.range(0));
}

void BM_FieldExact(benchmark::State& state) { field(state, kcover::FieldMethod::exact); }
void BM_FieldSweep(benchmark::State& state) { field(state, kcover::FieldMethod::sweep); }

void BM_LineOfSight(benchmark::State& state) {
  const auto env = urban(static_cast<int>(state.range(0)));
  const double far = env.width() - 0.5;
  const kcover::Point3 a{0.5, 0.5, 0.02};
  const kcover::Point3 b{far, far, 0.95};
  for (auto _ : state) benchmark::DoNotOptimize(kcover::line_of_sight(env, a, b));
}

}  // namespace

BENCHMARK(BM_FieldExact)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FieldSweep)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LineOfSight)->Arg(64)->Arg(128);
