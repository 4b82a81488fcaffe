#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "toonrig/dataset.hpp"
#include "toonrig/rig.hpp"

namespace toonrig {

/// 4 weight layers (3 hidden), ReLU activations, linear output. Weights are
/// row-major [rows x cols]; math runs in double, files store float32.
struct MlpModel {
  std::vector<int> layer_dims;  // [input, h1, h2, h3, output]
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::string activation = "relu";
  double param_scale = 30.0;

  // Input/output schema: landmark order, residual-coding center (the template
  // positions, normalized), component order for assembled ParamVectors.
  std::vector<std::string> landmark_schema;
  std::vector<double> input_center;
  std::vector<std::string> component_ids;
  uint64_t rig_fingerprint = 0;

  size_t parameter_count() const;
  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
};

struct TrainConfig {
  int epochs = 500;
  int batch_size = 256;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";
  uint64_t seed = 0;
  double validation_fraction = 0.1;
  int patience = 30;         // early stop after this many epochs w/o val improvement
  int plateau_epochs = 10;   // halve lr after this many epochs w/o val improvement
};

struct TrainResult {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  int epochs_run = 0;
};

/// Seeded uniform He-style init (biases zero); deterministic under seed.
MlpModel init_model(int input_dim, int output_dim, const std::array<int, 3>& hidden,
                    uint64_t seed);

/// Convenience: model dimensioned and schema'd for a rig (2L inputs, 3C outputs).
MlpModel init_model_for_rig(const Rig& rig, const std::array<int, 3>& hidden,
                            uint64_t seed);

/// Raw forward pass on an already-centered input vector.
std::vector<double> forward_raw(const MlpModel& m, const std::vector<double>& input);

/// Forward pass from a landmark set: checks the schema, applies residual
/// coding, returns normalized outputs in R^P.
std::vector<double> forward(const MlpModel& m, const LandmarkSet& landmarks);

/// Minimizes mean squared error of (prediction - params/30) with Adam and
/// backpropagation. Deterministic under cfg.seed. NaN loss aborts with the
/// offending epoch/batch in the message.
TrainResult train(MlpModel& m, const Dataset& ds, const TrainConfig& cfg);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

/// MSE loss (mean over outputs) and its analytic gradients for one sample.
double loss_and_gradients(const MlpModel& m, const std::vector<double>& input,
                          const std::vector<double>& target, Gradients* grads);

using GradFn = std::function<double(const MlpModel&, const std::vector<double>&,
                                    const std::vector<double>&, Gradients*)>;

/// Compares analytic gradients against central finite differences over at
/// least min_weights randomly sampled weights; returns the max relative
/// error. grad_fn overrides the analytic path (test hook).
double gradient_check(const MlpModel& m, const std::vector<double>& input,
                      const std::vector<double>& target, double epsilon,
                      size_t min_weights = 200, uint64_t seed = 1,
                      const GradFn& grad_fn = {});

/// forward, scale by param_scale, clamp to [-30, 30], assemble per component
/// order.
ParamVector predict_params(const MlpModel& m, const LandmarkSet& landmarks);

// Model file IO (binary container; float32 weights).
void save_model(const MlpModel& m, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace toonrig
