#include "toonrig/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "toonrig/error.hpp"
#include "toonrig/rng.hpp"

namespace toonrig {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Eigen::Map<const Matrix> weight_map(const MlpModel& m, size_t layer) {
  int rows = m.layer_dims[layer + 1];
  int cols = m.layer_dims[layer];
  // Stored row-major; Eigen default is column-major, so map as transposed.
  return Eigen::Map<const Matrix>(m.weights[layer].data(), cols, rows);
}

// Forward pass keeping pre-activations; X is [input_dim x batch].
struct ForwardTrace {
  std::vector<Matrix> activations;  // a[0] = X, a[i] = layer i output
};

Matrix forward_batch(const MlpModel& m, const Matrix& x, ForwardTrace* trace) {
  Matrix a = x;
  if (trace) trace->activations.push_back(a);
  const size_t n_layers = m.weights.size();
  for (size_t l = 0; l < n_layers; ++l) {
    Eigen::Map<const Vector> b(m.biases[l].data(), m.layer_dims[l + 1]);
    Matrix z = weight_map(m, l).transpose() * a;
    z.colwise() += b;
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);  // ReLU on hidden layers
    a = std::move(z);
    if (trace) trace->activations.push_back(a);
  }
  return a;
}

// Backprop of MSE loss (mean over outputs and batch columns) into gradients.
double backprop_batch(const MlpModel& m, const Matrix& x, const Matrix& target,
                      Gradients* grads) {
  ForwardTrace trace;
  Matrix out = forward_batch(m, x, &trace);
  const double batch = static_cast<double>(x.cols());
  const double denom = batch * out.rows();
  Matrix diff = out - target;
  double loss = diff.squaredNorm() / denom;

  if (grads) {
    grads->weights.assign(m.weights.size(), {});
    grads->biases.assign(m.biases.size(), {});
    Matrix delta = diff * (2.0 / denom);
    for (size_t l = m.weights.size(); l-- > 0;) {
      const Matrix& a_prev = trace.activations[l];
      Matrix dw = delta * a_prev.transpose();  // [out x in]
      Vector db = delta.rowwise().sum();
      grads->weights[l].resize(static_cast<size_t>(dw.rows()) * dw.cols());
      Eigen::Map<Matrix>(grads->weights[l].data(), dw.cols(), dw.rows()) = dw.transpose();
      grads->biases[l].assign(db.data(), db.data() + db.size());
      if (l > 0) {
        delta = weight_map(m, l) * delta;
        // ReLU derivative via the stored activation (a > 0 iff z > 0).
        delta.array() *= (trace.activations[l].array() > 0.0).cast<double>();
      }
    }
  }
  return loss;
}

}  // namespace

size_t MlpModel::parameter_count() const {
  size_t n = 0;
  for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

MlpModel init_model(int input_dim, int output_dim, const std::array<int, 3>& hidden,
                    uint64_t seed) {
  if (input_dim < 1 || output_dim < 1 || hidden[0] < 1 || hidden[1] < 1 || hidden[2] < 1)
    fail_validation("model dimensions must be >= 1");
  MlpModel m;
  m.layer_dims = {input_dim, hidden[0], hidden[1], hidden[2], output_dim};
  Rng rng(seed);
  for (size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    int fan_in = m.layer_dims[l];
    int fan_out = m.layer_dims[l + 1];
    double limit = std::sqrt(6.0 / fan_in);
    std::vector<double> w(static_cast<size_t>(fan_in) * fan_out);
    for (auto& v : w) v = rng.uniform(-limit, limit);
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::vector<double>(fan_out, 0.0));
  }
  m.input_center.assign(input_dim, 0.0);
  return m;
}

MlpModel init_model_for_rig(const Rig& rig, const std::array<int, 3>& hidden,
                            uint64_t seed) {
  std::vector<std::string> schema = rig.landmark_schema();
  std::vector<std::string> comps = rig.component_ids();
  MlpModel m = init_model(static_cast<int>(schema.size() * 2),
                          static_cast<int>(comps.size() * 3), hidden, seed);
  m.landmark_schema = schema;
  m.component_ids = comps;
  m.rig_fingerprint = rig.fingerprint();
  m.input_center.clear();
  for (const auto& id : schema) {
    Vec2 p = rig.template_landmarks.points.at(id);
    m.input_center.push_back(p.x);
    m.input_center.push_back(p.y);
  }
  return m;
}

std::vector<double> forward_raw(const MlpModel& m, const std::vector<double>& input) {
  if (static_cast<int>(input.size()) != m.input_dim())
    fail_validation("forward: input size " + std::to_string(input.size()) +
                    " != model input dim " + std::to_string(m.input_dim()));
  Matrix x(m.input_dim(), 1);
  for (int i = 0; i < m.input_dim(); ++i) x(i, 0) = input[i];
  Matrix out = forward_batch(m, x, nullptr);
  return std::vector<double>(out.data(), out.data() + out.rows());
}

namespace {

std::vector<double> centered_input(const MlpModel& m, const LandmarkSet& landmarks) {
  if (m.landmark_schema.empty())
    fail_validation("model has no landmark schema");
  std::vector<double> input;
  input.reserve(m.landmark_schema.size() * 2);
  for (const auto& id : m.landmark_schema) {
    auto it = landmarks.points.find(id);
    if (it == landmarks.points.end())
      fail_validation("landmark set missing '" + id + "' required by the model schema");
    input.push_back(it->second.x);
    input.push_back(it->second.y);
  }
  for (size_t i = 0; i < input.size(); ++i) input[i] -= m.input_center[i];
  return input;
}

}  // namespace

std::vector<double> forward(const MlpModel& m, const LandmarkSet& landmarks) {
  return forward_raw(m, centered_input(m, landmarks));
}

ParamVector predict_params(const MlpModel& m, const LandmarkSet& landmarks) {
  std::vector<double> out = forward(m, landmarks);
  if (out.size() != m.component_ids.size() * 3)
    fail_validation("model output dim does not match component schema");
  ParamVector p;
  for (size_t c = 0; c < m.component_ids.size(); ++c) {
    std::array<double, 3> w;
    for (int a = 0; a < 3; ++a)
      w[a] = std::clamp(out[c * 3 + a] * m.param_scale, -kWeightLimit, kWeightLimit);
    p.entries[m.component_ids[c]] = w;
  }
  return p;
}

double loss_and_gradients(const MlpModel& m, const std::vector<double>& input,
                          const std::vector<double>& target, Gradients* grads) {
  Matrix x(m.input_dim(), 1), t(m.output_dim(), 1);
  for (int i = 0; i < m.input_dim(); ++i) x(i, 0) = input[i];
  for (int i = 0; i < m.output_dim(); ++i) t(i, 0) = target[i];
  return backprop_batch(m, x, t, grads);
}

TrainResult train(MlpModel& m, const Dataset& ds, const TrainConfig& cfg) {
  if (ds.samples.empty()) fail_validation("train: dataset is empty");
  if (cfg.epochs < 1) fail_validation("train: epochs must be >= 1");
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 0.5))
    fail_validation("train: validation_fraction must be in (0, 0.5)");
  if (cfg.optimizer != "adam")
    fail_validation("train: unknown optimizer '" + cfg.optimizer + "'");
  if (m.rig_fingerprint != 0 && ds.rig_fingerprint != m.rig_fingerprint)
    fail_validation("train: dataset rig fingerprint does not match model schema");
  if (!m.landmark_schema.empty() && ds.landmark_schema != m.landmark_schema)
    fail_validation("train: dataset landmark schema does not match model");

  const int in_dim = m.input_dim(), out_dim = m.output_dim();

  // Assemble centered inputs / normalized targets once.
  std::vector<std::vector<double>> inputs(ds.samples.size()), targets(ds.samples.size());
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    std::vector<float> lm = flatten_landmarks(ds.samples[i], ds.landmark_schema);
    std::vector<float> pm = flatten_params(ds.samples[i], ds.component_ids);
    if (static_cast<int>(lm.size()) != in_dim || static_cast<int>(pm.size()) != out_dim)
      fail_validation("train: dataset record size does not match model dims");
    inputs[i].resize(in_dim);
    for (int k = 0; k < in_dim; ++k) inputs[i][k] = lm[k] - m.input_center[k];
    targets[i].resize(out_dim);
    for (int k = 0; k < out_dim; ++k) targets[i][k] = pm[k] / m.param_scale;
  }

  size_t n_val = std::max<size_t>(1, static_cast<size_t>(ds.samples.size() * cfg.validation_fraction));
  if (n_val >= ds.samples.size()) fail_validation("train: dataset too small for the split");
  size_t n_train = ds.samples.size() - n_val;

  std::vector<size_t> train_idx(n_train);
  std::iota(train_idx.begin(), train_idx.end(), 0);

  Matrix val_x(in_dim, static_cast<int>(n_val)), val_t(out_dim, static_cast<int>(n_val));
  for (size_t i = 0; i < n_val; ++i) {
    for (int k = 0; k < in_dim; ++k) val_x(k, static_cast<int>(i)) = inputs[n_train + i][k];
    for (int k = 0; k < out_dim; ++k) val_t(k, static_cast<int>(i)) = targets[n_train + i][k];
  }

  // Adam state.
  std::vector<std::vector<double>> mw, vw, mb, vb;
  for (size_t l = 0; l < m.weights.size(); ++l) {
    mw.emplace_back(m.weights[l].size(), 0.0);
    vw.emplace_back(m.weights[l].size(), 0.0);
    mb.emplace_back(m.biases[l].size(), 0.0);
    vb.emplace_back(m.biases[l].size(), 0.0);
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double lr = cfg.learning_rate;
  long step = 0;

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0, epochs_since_halving = 0;
  std::vector<std::vector<double>> best_weights = m.weights, best_biases = m.biases;
  Rng shuffle_rng(cfg.seed);

  const int batch = std::max(1, cfg.batch_size);
  Matrix bx(in_dim, batch), bt(out_dim, batch);
  Gradients grads;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(train_idx);
    double epoch_loss = 0;
    size_t batches = 0;
    for (size_t off = 0; off < n_train; off += batch) {
      int bsz = static_cast<int>(std::min<size_t>(batch, n_train - off));
      if (bx.cols() != bsz) {
        bx.resize(in_dim, bsz);
        bt.resize(out_dim, bsz);
      }
      for (int c = 0; c < bsz; ++c) {
        size_t idx = train_idx[off + c];
        for (int k = 0; k < in_dim; ++k) bx(k, c) = inputs[idx][k];
        for (int k = 0; k < out_dim; ++k) bt(k, c) = targets[idx][k];
      }
      double loss = backprop_batch(m, bx, bt, &grads);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "train: NaN/inf loss at epoch " << epoch << ", batch " << batches;
        fail_runtime(msg.str());
      }
      epoch_loss += loss * bsz;
      ++batches;
      ++step;
      double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (size_t l = 0; l < m.weights.size(); ++l) {
        auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                          std::vector<double>& mo, std::vector<double>& vo) {
          for (size_t k = 0; k < param.size(); ++k) {
            mo[k] = beta1 * mo[k] + (1 - beta1) * g[k];
            vo[k] = beta2 * vo[k] + (1 - beta2) * g[k] * g[k];
            param[k] -= lr * (mo[k] / bc1) / (std::sqrt(vo[k] / bc2) + eps);
          }
        };
        update(m.weights[l], grads.weights[l], mw[l], vw[l]);
        update(m.biases[l], grads.biases[l], mb[l], vb[l]);
      }
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(n_train));

    Matrix val_out = forward_batch(m, val_x, nullptr);
    double vloss = (val_out - val_t).squaredNorm() /
                   (static_cast<double>(val_x.cols()) * out_dim);
    result.val_loss.push_back(vloss);
    result.epochs_run = epoch + 1;

    if (vloss < best_val * (1.0 - 1e-6)) {
      best_val = vloss;
      best_weights = m.weights;
      best_biases = m.biases;
      epochs_since_best = 0;
      epochs_since_halving = 0;
    } else {
      ++epochs_since_best;
      ++epochs_since_halving;
    }
    if (cfg.plateau_epochs > 0 && epochs_since_halving >= cfg.plateau_epochs) {
      lr *= 0.5;
      epochs_since_halving = 0;
    }
    if (cfg.patience > 0 && epochs_since_best >= cfg.patience) break;
  }

  m.weights = std::move(best_weights);
  m.biases = std::move(best_biases);
  return result;
}

double gradient_check(const MlpModel& m, const std::vector<double>& input,
                      const std::vector<double>& target, double epsilon,
                      size_t min_weights, uint64_t seed, const GradFn& grad_fn) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3))
    fail_validation("gradient_check: epsilon must be in [1e-7, 1e-3]");
  const GradFn& fn = grad_fn ? grad_fn : GradFn(loss_and_gradients);

  Gradients analytic;
  fn(m, input, target, &analytic);

  // Flat index space over all weight matrices (biases excluded; they are a
  // strict subset of the same backprop path).
  std::vector<std::pair<size_t, size_t>> index;  // (layer, offset)
  for (size_t l = 0; l < m.weights.size(); ++l)
    for (size_t k = 0; k < m.weights[l].size(); ++k) index.emplace_back(l, k);

  size_t n_check = std::min(index.size(), std::max<size_t>(min_weights, 1));
  Rng rng(seed);
  rng.shuffle(index);

  MlpModel probe = m;
  double max_rel = 0.0;
  for (size_t i = 0; i < n_check; ++i) {
    auto [l, k] = index[i];
    double orig = probe.weights[l][k];
    probe.weights[l][k] = orig + epsilon;
    double lp = fn(probe, input, target, nullptr);
    probe.weights[l][k] = orig - epsilon;
    double lm = fn(probe, input, target, nullptr);
    probe.weights[l][k] = orig;
    double fd = (lp - lm) / (2.0 * epsilon);
    double an = analytic.weights[l][k];
    double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
    max_rel = std::max(max_rel, std::abs(fd - an) / denom);
  }
  return max_rel;
}

// --- model file --------------------------------------------------------------
//
// magic "TRNN" | u32 version | u32 n_dims | dims | u32 activation tag |
// f64 param_scale | u64 rig fingerprint | schema strings | component strings |
// input_center f32 | per layer: weights f32 row-major, biases f32.

namespace {
constexpr char kModelMagic[4] = {'T', 'R', 'N', 'N'};
constexpr uint32_t kModelVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
void put_str(std::ostream& out, const std::string& s) {
  put<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string get_str(std::istream& in) {
  uint32_t n = get<uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}
void put_f32s(std::ostream& out, const std::vector<double>& v) {
  for (double d : v) put<float>(out, static_cast<float>(d));
}
std::vector<double> get_f32s(std::istream& in, size_t n) {
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = get<float>(in);
  return v;
}
}  // namespace

void save_model(const MlpModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_runtime("cannot write model file " + path);
  out.write(kModelMagic, 4);
  put<uint32_t>(out, kModelVersion);
  put<uint32_t>(out, static_cast<uint32_t>(m.layer_dims.size()));
  for (int d : m.layer_dims) put<uint32_t>(out, static_cast<uint32_t>(d));
  put<uint32_t>(out, m.activation == "relu" ? 0u : 1u);
  put<double>(out, m.param_scale);
  put<uint64_t>(out, m.rig_fingerprint);
  put<uint32_t>(out, static_cast<uint32_t>(m.landmark_schema.size()));
  for (const auto& s : m.landmark_schema) put_str(out, s);
  put<uint32_t>(out, static_cast<uint32_t>(m.component_ids.size()));
  for (const auto& s : m.component_ids) put_str(out, s);
  put_f32s(out, m.input_center);
  for (size_t l = 0; l < m.weights.size(); ++l) {
    put_f32s(out, m.weights[l]);
    put_f32s(out, m.biases[l]);
  }
  if (!out) fail_runtime("short write to model file " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open model file " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0)
    fail_validation(path + ": not a model file (bad magic)");
  uint32_t version = get<uint32_t>(in);
  if (version != kModelVersion)
    fail_validation(path + ": unsupported model version " + std::to_string(version));
  MlpModel m;
  uint32_t n_dims = get<uint32_t>(in);
  if (n_dims != 5) fail_validation(path + ": expected 5 layer dims (4 weight layers)");
  for (uint32_t i = 0; i < n_dims; ++i)
    m.layer_dims.push_back(static_cast<int>(get<uint32_t>(in)));
  m.activation = get<uint32_t>(in) == 0 ? "relu" : "unknown";
  m.param_scale = get<double>(in);
  m.rig_fingerprint = get<uint64_t>(in);
  uint32_t n_schema = get<uint32_t>(in);
  for (uint32_t i = 0; i < n_schema; ++i) m.landmark_schema.push_back(get_str(in));
  uint32_t n_comp = get<uint32_t>(in);
  for (uint32_t i = 0; i < n_comp; ++i) m.component_ids.push_back(get_str(in));
  m.input_center = get_f32s(in, static_cast<size_t>(m.layer_dims.front()));
  for (size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    size_t n_w = static_cast<size_t>(m.layer_dims[l]) * m.layer_dims[l + 1];
    m.weights.push_back(get_f32s(in, n_w));
    m.biases.push_back(get_f32s(in, static_cast<size_t>(m.layer_dims[l + 1])));
  }
  if (!in) fail_validation(path + ": truncated model file");
  for (const auto& w : m.weights)
    for (double v : w)
      if (!std::isfinite(v)) fail_validation(path + ": non-finite weight");
  return m;
}

}  // namespace toonrig
