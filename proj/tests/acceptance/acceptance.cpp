// Acceptance suite: runs every criterion end to end and prints one PASS/FAIL
// line per criterion. Exits nonzero if any criterion fails. A subset of
// criterion numbers may be passed as arguments.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "toonrig/anim.hpp"
#include "toonrig/assembly.hpp"
#include "toonrig/assets.hpp"
#include "toonrig/assign.hpp"
#include "toonrig/blob.hpp"
#include "toonrig/dataset.hpp"
#include "toonrig/error.hpp"
#include "toonrig/inpaint.hpp"
#include "toonrig/mlp.hpp"
#include "toonrig/raster.hpp"
#include "toonrig/rng.hpp"
#include "toonrig/similarity.hpp"

using namespace toonrig;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "toonrig_acceptance";
  fs::create_directories(dir);
  return dir;
}

int run_cmd(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

bool dirs_byte_identical(const fs::path& a, const fs::path& b, std::string* why) {
  std::vector<std::string> names_a, names_b;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) names_a.push_back(fs::relative(e.path(), a).string());
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) names_b.push_back(fs::relative(e.path(), b).string());
  std::sort(names_a.begin(), names_a.end());
  std::sort(names_b.begin(), names_b.end());
  if (names_a != names_b) {
    *why = "file lists differ";
    return false;
  }
  for (const auto& name : names_a) {
    if (slurp(a / name) != slurp(b / name)) {
      *why = name + " differs";
      return false;
    }
  }
  return true;
}

// Shared expensive artifacts, built once for criteria 1, 2 and 8.
struct SharedState {
  Rig rig1024;
  Rig rig512;
  Image atlas;
  MlpModel model;
  fs::path model_path;
  bool trained = false;
  double dataset_seconds = 0;
  double train_seconds = 0;
};
SharedState g_state;

void ensure_trained() {
  if (g_state.trained) return;
  g_state.rig1024 = make_default_rig();
  g_state.rig512 = g_state.rig1024.scaled_to(512);
  g_state.atlas = make_default_atlas(g_state.rig1024);

  auto t0 = Clock::now();
  Dataset ds = build_dataset(g_state.rig512, 10000, 42);
  g_state.dataset_seconds = seconds_since(t0);

  t0 = Clock::now();
  g_state.model = init_model_for_rig(g_state.rig512, {256, 256, 128}, 42);
  TrainConfig cfg;  // spec defaults
  cfg.seed = 42;
  train(g_state.model, ds, cfg);
  g_state.train_seconds = seconds_since(t0);

  g_state.model_path = work_dir() / "acceptance_model.trnn";
  save_model(g_state.model, g_state.model_path.string());
  g_state.trained = true;
}

// --- criterion 1: round-trip parameter recovery ------------------------------

bool criterion_round_trip(std::string& detail) {
  ensure_trained();
  Dataset held = build_dataset(g_state.rig512, 1000, 43);

  std::vector<double> errors;
  for (const auto& s : held.samples) {
    ParamVector pred = predict_params(g_state.model, s.landmarks);
    for (const auto& [cid, w] : s.params.entries)
      for (int a = 0; a < 3; ++a)
        errors.push_back(std::abs(pred.entries.at(cid)[a] - w[a]));
  }
  std::sort(errors.begin(), errors.end());
  double mean = 0;
  for (double e : errors) mean += e;
  mean /= errors.size();
  double p95 = errors[static_cast<size_t>(errors.size() * 0.95)];

  std::ostringstream ss;
  ss << "mean |err| " << mean << " units (<= 1.0), p95 " << p95
     << " (<= 3.0); dataset " << g_state.dataset_seconds << " s (< 300), train "
     << g_state.train_seconds << " s (< 900)";
  detail = ss.str();
  return mean <= 1.0 && p95 <= 3.0 && g_state.dataset_seconds < 300 &&
         g_state.train_seconds < 900;
}

// --- criterion 2: < 30 s fit with a pretrained model --------------------------

bool criterion_fit_timing(std::string& detail) {
  ensure_trained();
  fs::path dir = work_dir();

  ParamVector truth = ParamVector::zeros(g_state.rig1024.component_ids());
  truth.set("left_eye", Axis::y, 8.0);
  truth.set("right_eye", Axis::scale, -6.0);
  truth.set("nose", Axis::x, -5.0);
  truth.set("mouth", Axis::scale, 10.0);
  truth.set("left_eyebrow", Axis::y, -7.0);
  Fixture fx = make_fixture(g_state.rig1024, g_state.atlas, truth);
  write_png(fx.portrait, (dir / "portrait.png").string());
  save_landmarks_json(fx.landmarks, 1024, 1024, (dir / "portrait_landmarks.json").string());
  save_rig(g_state.rig1024, (dir / "rig.json").string());

  std::string cmd = std::string(TOONRIG_CLI_PATH) + " fit --rig " +
                    (dir / "rig.json").string() + " --model " +
                    g_state.model_path.string() + " --portrait " +
                    (dir / "portrait.png").string() + " --landmarks " +
                    (dir / "portrait_landmarks.json").string() + " --out " +
                    (dir / "pkg_timing").string() + " > " +
                    (dir / "fit_stdout.txt").string();
  auto t0 = Clock::now();
  int rc = run_cmd(cmd);
  double wall = seconds_since(t0);

  // Golden fixture: the package's re-render must reproduce the input portrait
  // (mean |RGB| error over the portrait's opaque pixels; fit error only moves
  // feature edges by fractions of a pixel).
  double mean_err = 1e9;
  if (rc == 0) {
    ModelPackage pkg = load_package((dir / "pkg_timing").string());
    Image rerender = render(pkg.rig, pkg.atlas, pkg.fitted_params);
    double sum = 0;
    size_t n = 0;
    for (int y = 0; y < fx.portrait.height; ++y)
      for (int x = 0; x < fx.portrait.width; ++x) {
        const uint8_t* a = fx.portrait.at(x, y);
        if (a[3] != 255) continue;
        const uint8_t* b = rerender.at(x, y);
        for (int c = 0; c < 3; ++c) sum += std::abs(int(a[c]) - int(b[c]));
        n += 3;
      }
    mean_err = sum / static_cast<double>(n);
  }

  std::ostringstream ss;
  ss << "cmd_fit wall " << wall << " s (< 30), exit " << rc
     << "; re-render mean |RGB| error " << mean_err << " (< 5); stage breakdown:\n"
     << slurp(dir / "fit_stdout.txt");
  detail = ss.str();
  return rc == 0 && wall < 30.0 && mean_err < 5.0;
}

// --- criterion 3: gradient correctness ----------------------------------------

bool criterion_gradients(std::string& detail) {
  Rng rng(2024);
  double worst = 0;
  for (int draw = 0; draw < 10; ++draw) {
    int in_dim = 6 + static_cast<int>(rng.next_below(100));
    int out_dim = 2 + static_cast<int>(rng.next_below(16));
    std::array<int, 3> hidden = {16 + static_cast<int>(rng.next_below(48)),
                                 16 + static_cast<int>(rng.next_below(48)),
                                 8 + static_cast<int>(rng.next_below(24))};
    MlpModel m = init_model(in_dim, out_dim, hidden, rng.next_u64());
    std::vector<double> input(in_dim), target(out_dim);
    for (auto& v : input) v = rng.uniform(-1, 1);
    for (auto& v : target) v = rng.uniform(-1, 1);
    double err = gradient_check(m, input, target, 1e-5, 200, rng.next_u64());
    worst = std::max(worst, err);
  }
  std::ostringstream ss;
  ss << "max relative error over 10 draws: " << worst << " (< 1e-4)";
  detail = ss.str();
  return worst < 1e-4;
}

// --- criterion 4: composition linearity ---------------------------------------

bool criterion_linearity(std::string& detail) {
  Rig rig = make_default_rig();
  DeformedGeometry rest = compose_geometry(rig, ParamVector::zeros(rig.component_ids()));
  auto params = sample_params(rig, 2000, 4242);
  double worst = 0;

  for (size_t k = 0; k + 1 < params.size(); k += 2) {
    ParamVector a = params[k], b = params[k + 1], sum;
    for (auto& [id, w] : a.entries)
      for (int i = 0; i < 3; ++i) w[i] *= 0.5;
    for (auto& [id, w] : b.entries)
      for (int i = 0; i < 3; ++i) w[i] *= 0.5;
    for (const auto& [id, w] : a.entries) {
      std::array<double, 3> s;
      for (int i = 0; i < 3; ++i) s[i] = w[i] + b.entries.at(id)[i];
      sum.entries[id] = s;
    }
    DeformedGeometry ga = compose_geometry(rig, a);
    DeformedGeometry gb = compose_geometry(rig, b);
    DeformedGeometry gs = compose_geometry(rig, sum);
    for (const auto& [id, vs] : gs.layer_vertices) {
      const auto& va = ga.layer_vertices.at(id);
      const auto& vb = gb.layer_vertices.at(id);
      const auto& vr = rest.layer_vertices.at(id);
      for (size_t i = 0; i < vs.size(); ++i) {
        Vec2 lhs = vs[i] - vr[i];
        Vec2 rhs = (va[i] - vr[i]) + (vb[i] - vr[i]);
        double scale = std::max(1.0, std::max(lhs.norm(), rhs.norm()));
        worst = std::max(worst, (lhs - rhs).norm() / scale);
      }
    }
  }

  // Homogeneity over the same draws.
  for (size_t k = 0; k < params.size(); k += 2) {
    ParamVector w = params[k];
    for (auto& [id, ws] : w.entries)
      for (int i = 0; i < 3; ++i) ws[i] *= 0.5;
    for (double alpha : {0.5, 2.0}) {
      ParamVector scaled = w;
      for (auto& [id, ws] : scaled.entries)
        for (int i = 0; i < 3; ++i) ws[i] *= alpha;
      DeformedGeometry g1 = compose_geometry(rig, w);
      DeformedGeometry g2 = compose_geometry(rig, scaled);
      for (const auto& [id, v2] : g2.layer_vertices) {
        const auto& v1 = g1.layer_vertices.at(id);
        const auto& vr = rest.layer_vertices.at(id);
        for (size_t i = 0; i < v2.size(); ++i) {
          Vec2 lhs = v2[i] - vr[i];
          Vec2 rhs = (v1[i] - vr[i]) * alpha;
          double scale = std::max(1.0, std::max(lhs.norm(), rhs.norm()));
          worst = std::max(worst, (lhs - rhs).norm() / scale);
        }
      }
    }
  }

  // Zero reproduces rest bit-exactly.
  bool zero_exact = true;
  DeformedGeometry zero = compose_geometry(rig, ParamVector::zeros(rig.component_ids()));
  for (const auto& c : rig.components) {
    const auto& v = zero.layer_vertices.at(c.id);
    for (size_t i = 0; i < v.size(); ++i)
      if (v[i].x != c.rest_mesh.vertices[i].x || v[i].y != c.rest_mesh.vertices[i].y)
        zero_exact = false;
  }

  std::ostringstream ss;
  ss << "1000 pairs, worst relative deviation " << worst
     << " (< 1e-9); zero-weight bit-exact: " << (zero_exact ? "yes" : "no");
  detail = ss.str();
  return worst < 1e-9 && zero_exact;
}

// --- criterion 5: marker fidelity ---------------------------------------------

bool criterion_marker_fidelity(std::string& detail) {
  Rig rig = make_default_rig();
  auto params = sample_params(rig, 500, 777);
  double worst = 0;
  size_t mismatches = 0;
  for (const auto& p : params) {
    Image img = render_markers(rig, p);
    auto blobs = detect_blobs(img);
    if (blobs.size() != rig.template_landmarks.points.size()) {
      ++mismatches;
      continue;
    }
    LandmarkSet det = associate_landmarks(blobs, rig.template_landmarks, rig.canvas_size);
    auto analytic = displaced_landmarks(rig, p);
    for (const auto& [id, pos] : analytic)
      worst = std::max(worst, (det.points.at(id) * 1024.0 - pos).norm());
  }
  std::ostringstream ss;
  ss << "500 draws at 1024^2: worst centroid error " << worst << " px (<= 0.7), "
     << mismatches << " count mismatches";
  detail = ss.str();
  return worst <= 0.7 && mismatches == 0;
}

// --- criterion 6: procrustes oracle -------------------------------------------

bool criterion_procrustes(std::string& detail) {
  Rng rng(31337);
  constexpr double kPi = 3.14159265358979323846;
  double worst_param = 0;

  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 3 + static_cast<size_t>(rng.next_below(8));
    std::vector<Vec2> src, dst;
    for (size_t i = 0; i < n; ++i) src.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10)});
    SimilarityTransform truth;
    truth.rotation = rng.uniform(-kPi, kPi);
    truth.scale = rng.uniform(0.25, 3.0);
    truth.translation = {rng.uniform(-30, 30), rng.uniform(-30, 30)};
    for (const auto& p : src) dst.push_back(truth.apply(p));
    SimilarityTransform got = fit_similarity(src, dst);
    worst_param = std::max(worst_param,
                           std::abs(std::remainder(got.rotation - truth.rotation, 2 * kPi)));
    worst_param = std::max(worst_param, std::abs(got.scale - truth.scale));
    worst_param = std::max(worst_param, std::abs(got.translation.x - truth.translation.x));
    worst_param = std::max(worst_param, std::abs(got.translation.y - truth.translation.y));
  }

  // Grid-search oracle on noisy 4-point toys.
  double worst_gap = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec2> src, dst;
    SimilarityTransform truth;
    truth.rotation = rng.uniform(-1, 1);
    truth.scale = rng.uniform(0.5, 2.0);
    truth.translation = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (int i = 0; i < 4; ++i) {
      Vec2 p{rng.uniform(-8, 8), rng.uniform(-8, 8)};
      src.push_back(p);
      Vec2 q = truth.apply(p);
      dst.push_back({q.x + rng.uniform(-0.5, 0.5), q.y + rng.uniform(-0.5, 0.5)});
    }
    double impl = similarity_residual(fit_similarity(src, dst), src, dst);
    double best = 1e30;
    for (int k = 0; k < 20000; ++k) {
      double theta = -kPi + 2 * kPi * k / 20000.0;
      double c = std::cos(theta), s = std::sin(theta);
      double ata[3][3] = {}, atb[3] = {};
      for (size_t i = 0; i < src.size(); ++i) {
        double rx = c * src[i].x - s * src[i].y;
        double ry = s * src[i].x + c * src[i].y;
        const double rows[2][3] = {{rx, 1, 0}, {ry, 0, 1}};
        const double b[2] = {dst[i].x, dst[i].y};
        for (int r = 0; r < 2; ++r)
          for (int a2 = 0; a2 < 3; ++a2) {
            for (int b2 = 0; b2 < 3; ++b2) ata[a2][b2] += rows[r][a2] * rows[r][b2];
            atb[a2] += rows[r][a2] * b[r];
          }
      }
      double m[3][4] = {{ata[0][0], ata[0][1], ata[0][2], atb[0]},
                        {ata[1][0], ata[1][1], ata[1][2], atb[1]},
                        {ata[2][0], ata[2][1], ata[2][2], atb[2]}};
      for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
          if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        std::swap(m[piv], m[col]);
        for (int r = 0; r < 3; ++r) {
          if (r == col) continue;
          double f = m[r][col] / m[col][col];
          for (int b2 = col; b2 < 4; ++b2) m[r][b2] -= f * m[col][b2];
        }
      }
      double sc = m[0][3] / m[0][0];
      if (sc <= 0) continue;
      SimilarityTransform t;
      t.rotation = theta;
      t.scale = sc;
      t.translation = {m[1][3] / m[1][1], m[2][3] / m[2][2]};
      best = std::min(best, similarity_residual(t, src, dst));
    }
    worst_gap = std::max(worst_gap, std::abs(impl - best));
  }

  std::ostringstream ss;
  ss << "100 recoveries, worst parameter error " << worst_param
     << " (< 1e-6); grid-oracle residual gap " << worst_gap << " (< 1e-3)";
  detail = ss.str();
  return worst_param < 1e-6 && worst_gap < 1e-3;
}

// --- criterion 7: inpaint harmonic oracle --------------------------------------

bool criterion_inpaint(std::string& detail) {
  // Linear gradient with a centered 8x8 hole.
  Image img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      img.set(x, y, {static_cast<uint8_t>(x * 4), static_cast<uint8_t>(y * 3),
                     static_cast<uint8_t>(255 - x * 2), 255});
  BinaryMask hole(64, 64);
  for (int y = 28; y < 36; ++y)
    for (int x = 28; x < 36; ++x) hole.set(x, y, true);
  Image filled = inpaint(img, hole);
  double worst_fill = 0;
  for (int y = 28; y < 36; ++y)
    for (int x = 28; x < 36; ++x) {
      worst_fill = std::max(worst_fill, std::abs(double(filled.at(x, y)[0]) - x * 4));
      worst_fill = std::max(worst_fill, std::abs(double(filled.at(x, y)[1]) - y * 3));
      worst_fill = std::max(worst_fill, std::abs(double(filled.at(x, y)[2]) - (255 - x * 2)));
    }

  // Constant image: identity.
  Image flat(32, 32, {200, 150, 100, 255});
  BinaryMask m2(32, 32);
  for (int y = 8; y < 24; ++y)
    for (int x = 8; x < 24; ++x) m2.set(x, y, true);
  bool const_identity = inpaint(flat, m2).pixels == flat.pixels;

  // Maximum principle over 50 random masks.
  Rng rng(999);
  bool max_principle = true;
  for (int trial = 0; trial < 50 && max_principle; ++trial) {
    Image rimg(24, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        rimg.set(x, y, {static_cast<uint8_t>(rng.next_below(256)),
                        static_cast<uint8_t>(rng.next_below(256)),
                        static_cast<uint8_t>(rng.next_below(256)), 255});
    BinaryMask rmask(24, 24);
    int cx = 5 + static_cast<int>(rng.next_below(14));
    int cy = 5 + static_cast<int>(rng.next_below(14));
    int r = 2 + static_cast<int>(rng.next_below(4));
    for (int y = 1; y < 23; ++y)
      for (int x = 1; x < 23; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) rmask.set(x, y, true);
    int lo[4] = {256, 256, 256, 256}, hi[4] = {-1, -1, -1, -1};
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) {
        if (rmask.get(x, y)) continue;
        bool boundary = false;
        for (auto [dx, dy] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
          int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < 24 && ny < 24 && rmask.get(nx, ny)) boundary = true;
        }
        if (!boundary) continue;
        for (int c = 0; c < 4; ++c) {
          lo[c] = std::min(lo[c], int(rimg.at(x, y)[c]));
          hi[c] = std::max(hi[c], int(rimg.at(x, y)[c]));
        }
      }
    Image rout = inpaint(rimg, rmask);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        if (rmask.get(x, y))
          for (int c = 0; c < 4; ++c)
            if (int(rout.at(x, y)[c]) < lo[c] || int(rout.at(x, y)[c]) > hi[c])
              max_principle = false;
  }

  std::ostringstream ss;
  ss << "gradient fill worst error " << worst_fill << "/255 (<= 2); constant identity: "
     << (const_identity ? "yes" : "no") << "; max principle over 50 masks: "
     << (max_principle ? "held" : "violated");
  detail = ss.str();
  return worst_fill <= 2.0 && const_identity && max_principle;
}

// --- criterion 8: animation artifact -------------------------------------------

bool criterion_artifact(std::string& detail) {
  ensure_trained();
  const Rig& rig = g_state.rig1024;

  ParamVector truth = ParamVector::zeros(rig.component_ids());
  truth.set("left_eye", Axis::y, 9.0);
  truth.set("right_eye", Axis::y, 9.0);
  truth.set("left_eye", Axis::scale, 6.0);
  truth.set("right_eye", Axis::scale, 6.0);
  truth.set("mouth", Axis::y, -6.0);
  Fixture fx = make_fixture(rig, g_state.atlas, truth);

  ModelPackage pkg = begin_package(rig, fx.portrait, fx.landmarks, 2048, 1024);
  fit_portrait(pkg, g_state.model);

  ExpressionMapping mapping = make_default_mapping();
  std::vector<ExpressionFrame> frames = {
      ExpressionFrame::make({}, 0.0),
      ExpressionFrame::make({{"eyeBlinkLeft", 1.0}, {"eyeBlinkRight", 1.0}}, 0.1)};

  auto iris_pixels_in_footprints = [&](const Image& frame) {
    size_t count = 0;
    for (const char* eye_id : {"left_eye", "right_eye"}) {
      const Component* eye = rig.find_component(eye_id);
      double ws = pkg.fitted_params.entries.at(eye_id)[2];
      double s = 1.0 + (ws / kWeightLimit) * eye->gains.s_max;
      Vec2 center = eye->anchor + Vec2{(pkg.fitted_params.entries.at(eye_id)[0] / 30.0) *
                                           eye->gains.dx_max,
                                       (pkg.fitted_params.entries.at(eye_id)[1] / 30.0) *
                                           eye->gains.dy_max};
      int radius = static_cast<int>(20 * s * 0.7);  // stay inside the true iris
      int cy = static_cast<int>(center.y), cx = static_cast<int>(center.x);
      for (int y = cy - radius; y <= cy + radius; ++y)
        for (int x = cx - radius; x <= cx + radius; ++x) {
          if ((x - center.x) * (x - center.x) + (y - center.y) * (y - center.y) >
              radius * radius)
            continue;
          const uint8_t* p = frame.at(x, y);
          double d = 0;
          for (int c = 0; c < 3; ++c)
            d += (double(p[c]) - DefaultColors::iris[c]) * (double(p[c]) - DefaultColors::iris[c]);
          if (std::sqrt(d) < 30.0) ++count;
        }
    }
    return count;
  };

  // Before repainting: the blink frame exposes the painted-on eyes.
  std::vector<Image> before = render_timeline(pkg, frames, mapping);
  size_t before_count = iris_pixels_in_footprints(before[1]);
  bool neutral_matches_before =
      before[0].pixels == render(pkg.rig, pkg.atlas, pkg.fitted_params).pixels;

  repaint_base_face(pkg);
  std::vector<Image> after = render_timeline(pkg, frames, mapping);
  size_t after_count = iris_pixels_in_footprints(after[1]);
  bool neutral_matches_after =
      after[0].pixels == render(pkg.rig, pkg.atlas, pkg.fitted_params).pixels;

  std::ostringstream ss;
  ss << "iris-colored pixels in blink frame: before " << before_count
     << " (> 0), after " << after_count << " (== 0); neutral bit-match: "
     << (neutral_matches_before && neutral_matches_after ? "yes" : "no");
  detail = ss.str();
  return before_count > 0 && after_count == 0 && neutral_matches_before &&
         neutral_matches_after;
}

// --- criterion 9: determinism --------------------------------------------------

bool criterion_determinism(std::string& detail) {
  fs::path dir = work_dir() / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string cli = TOONRIG_CLI_PATH;
  std::string env = "SOURCE_DATE_EPOCH=1700000000 ";
  std::ostringstream why;
  bool ok = true;

  // Assets for the runs.
  if (run_cmd(cli + " init --out " + (dir / "assets").string() + " > /dev/null") != 0)
    return false;
  std::string rig = (dir / "assets/rig.json").string();

  // synth across worker counts.
  for (auto [name, workers] : {std::pair{"s1", 1}, {"s2", 3}}) {
    int rc = run_cmd(cli + " synth --rig " + rig + " --out " + (dir / name).string() +
                     ".trds --n 300 --seed 11 --size 512 --workers " +
                     std::to_string(workers) + " > /dev/null");
    if (rc != 0) ok = false;
  }
  if (slurp(dir / "s1.trds") != slurp(dir / "s2.trds") || slurp(dir / "s1.trds").empty()) {
    ok = false;
    why << "synth bytes differ across workers; ";
  }

  // train twice on the same dataset.
  for (const char* name : {"m1", "m2"}) {
    int rc = run_cmd(cli + " train --dataset " + (dir / "s1.trds").string() + " --rig " +
                     rig + " --size 512 --out " + (dir / name).string() +
                     ".trnn --seed 11 --epochs 3 > /dev/null");
    if (rc != 0) ok = false;
  }
  if (slurp(dir / "m1.trnn") != slurp(dir / "m2.trnn") || slurp(dir / "m1.trnn").empty()) {
    ok = false;
    why << "train bytes differ across runs; ";
  }

  // fit across worker counts with a pinned provenance epoch.
  ensure_trained();
  for (auto [name, workers] : {std::pair{"p1", 1}, {"p2", 2}}) {
    int rc = run_cmd(env + cli + " fit --rig " + rig + " --model " +
                     g_state.model_path.string() + " --portrait " +
                     (dir / "assets/portrait.png").string() + " --landmarks " +
                     (dir / "assets/portrait_landmarks.json").string() + " --out " +
                     (dir / name).string() + " --workers " + std::to_string(workers) +
                     " > /dev/null");
    if (rc != 0) {
      ok = false;
      why << "fit exit " << rc << "; ";
    }
  }
  std::string mismatch;
  if (!dirs_byte_identical(dir / "p1", dir / "p2", &mismatch)) {
    ok = false;
    why << "fit packages differ (" << mismatch << "); ";
  }

  // animate across worker counts.
  for (auto [name, workers] : {std::pair{"f1", 1}, {"f2", 2}}) {
    int rc = run_cmd(cli + " animate --package " + (dir / "p1").string() + " --timeline " +
                     (dir / "assets/timeline.json").string() + " --mapping " +
                     (dir / "assets/mapping.json").string() + " --out " +
                     (dir / name).string() + " --workers " + std::to_string(workers) +
                     " > /dev/null");
    if (rc != 0) ok = false;
  }
  if (!dirs_byte_identical(dir / "f1", dir / "f2", &mismatch)) {
    ok = false;
    why << "animate frames differ (" << mismatch << "); ";
  }

  detail = ok ? "synth/train/fit/animate byte-identical across seeds and worker counts"
              : why.str();
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int number;
    const char* name;
    std::function<bool(std::string&)> fn;
  };
  std::vector<Criterion> criteria = {
      {1, "round-trip parameter recovery (10k @ 512^2, seed 42)", criterion_round_trip},
      {2, "fit completes under 30 s with a pretrained model", criterion_fit_timing},
      {3, "gradient check < 1e-4 at eps 1e-5", criterion_gradients},
      {4, "composition linearity to 1e-9, zero bit-exact", criterion_linearity},
      {5, "marker fidelity 0.7 px over 500 draws", criterion_marker_fidelity},
      {6, "similarity fit recovery + grid-search oracle", criterion_procrustes},
      {7, "inpaint harmonic oracle", criterion_inpaint},
      {8, "animation artifact removed by repainting", criterion_artifact},
      {9, "determinism across runs and worker counts", criterion_determinism},
  };

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.number)) continue;
    std::string detail;
    bool pass = false;
    try {
      pass = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s\n        %s\n", pass ? "PASS" : "FAIL", c.number,
                c.name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
