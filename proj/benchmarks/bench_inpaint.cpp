#include <benchmark/benchmark.h>

#include "toonrig/inpaint.hpp"

using namespace toonrig;

static void BM_InpaintSquareHole(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Image img(128, 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      img.set(x, y, {static_cast<uint8_t>(2 * x), 128, 64, 255});
  BinaryMask mask(128, 128);
  for (int y = 64 - n / 2; y < 64 + n / 2; ++y)
    for (int x = 64 - n / 2; x < 64 + n / 2; ++x) mask.set(x, y, true);
  for (auto _ : state) {
    Image out = inpaint(img, mask, {.workers = 1});
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_InpaintSquareHole)->Arg(8)->Arg(24)->Arg(48);

BENCHMARK_MAIN();
