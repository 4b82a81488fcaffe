#include <benchmark/benchmark.h>

#include "toonrig/assets.hpp"
#include "toonrig/mlp.hpp"

using namespace toonrig;

static void BM_Forward(benchmark::State& state) {
  Rig rig = make_default_rig();
  MlpModel model = init_model_for_rig(rig, {256, 256, 128}, 3);
  std::vector<double> input(model.input_dim(), 0.01);
  for (auto _ : state) {
    auto out = forward_raw(model, input);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_Forward);

static void BM_LossAndGradients(benchmark::State& state) {
  Rig rig = make_default_rig();
  MlpModel model = init_model_for_rig(rig, {256, 256, 128}, 3);
  std::vector<double> input(model.input_dim(), 0.01);
  std::vector<double> target(model.output_dim(), 0.1);
  Gradients grads;
  for (auto _ : state) {
    double loss = loss_and_gradients(model, input, target, &grads);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_LossAndGradients);

BENCHMARK_MAIN();
