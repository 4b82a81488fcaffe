#include <benchmark/benchmark.h>

#include "toonrig/assets.hpp"
#include "toonrig/blob.hpp"
#include "toonrig/raster.hpp"

using namespace toonrig;

static void BM_RenderFull(benchmark::State& state) {
  Rig rig = make_default_rig().scaled_to(static_cast<int>(state.range(0)));
  Image atlas = make_default_atlas(make_default_rig());
  ParamVector params = ParamVector::zeros(rig.component_ids());
  for (auto _ : state) {
    Image img = render(rig, atlas, params, std::nullopt, {.workers = 1});
    benchmark::DoNotOptimize(img);
  }
}
BENCHMARK(BM_RenderFull)->Arg(512)->Arg(1024);

static void BM_RenderMarkers(benchmark::State& state) {
  Rig rig = make_default_rig().scaled_to(static_cast<int>(state.range(0)));
  ParamVector params = ParamVector::zeros(rig.component_ids());
  for (auto _ : state) {
    Image img = render_markers(rig, params, {}, {.workers = 1});
    benchmark::DoNotOptimize(img);
  }
}
BENCHMARK(BM_RenderMarkers)->Arg(512)->Arg(1024);

static void BM_DetectBlobs(benchmark::State& state) {
  Rig rig = make_default_rig().scaled_to(static_cast<int>(state.range(0)));
  ParamVector params = ParamVector::zeros(rig.component_ids());
  Image markers = render_markers(rig, params, {}, {.workers = 1});
  for (auto _ : state) {
    auto blobs = detect_blobs(markers);
    benchmark::DoNotOptimize(blobs);
  }
}
BENCHMARK(BM_DetectBlobs)->Arg(512)->Arg(1024);

BENCHMARK_MAIN();
