#include <benchmark/benchmark.h>

#include "toonrig/assets.hpp"
#include "toonrig/dataset.hpp"
#include "toonrig/rig.hpp"

using namespace toonrig;

static void BM_ComposeGeometry(benchmark::State& state) {
  Rig rig = make_default_rig();
  ParamVector params = sample_params(rig, 1, 7)[0];
  for (auto _ : state) {
    DeformedGeometry geo = compose_geometry(rig, params);
    benchmark::DoNotOptimize(geo);
  }
}
BENCHMARK(BM_ComposeGeometry);

static void BM_SampleParams(benchmark::State& state) {
  Rig rig = make_default_rig();
  for (auto _ : state) {
    auto params = sample_params(rig, static_cast<size_t>(state.range(0)), 42);
    benchmark::DoNotOptimize(params);
  }
}
BENCHMARK(BM_SampleParams)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
