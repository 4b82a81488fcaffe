// Command-line driver: init, synth, train, fit, render, animate, verify.
// Exit codes: 0 success, 2 validation error, 3 runtime error. Errors go to
// stderr as one JSON object per failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "toonrig/anim.hpp"
#include "toonrig/assembly.hpp"
#include "toonrig/assets.hpp"
#include "toonrig/blob.hpp"
#include "toonrig/dataset.hpp"
#include "toonrig/error.hpp"
#include "toonrig/hash.hpp"
#include "toonrig/mlp.hpp"
#include "toonrig/parallel.hpp"
#include "toonrig/raster.hpp"
#include "toonrig/rig.hpp"
#include "toonrig/version.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace toonrig;

namespace {

class StageClock {
 public:
  void mark(const std::string& stage) {
    auto now = std::chrono::steady_clock::now();
    stages_.emplace_back(stage, std::chrono::duration<double, std::milli>(now - last_).count());
    last_ = now;
  }
  void print() const {
    double total = 0;
    std::printf("%-12s %10s\n", "stage", "ms");
    for (const auto& [name, ms] : stages_) {
      std::printf("%-12s %10.1f\n", name.c_str(), ms);
      total += ms;
    }
    std::printf("%-12s %10.1f\n", "total", total);
  }
  double total_ms() const {
    double total = 0;
    for (const auto& [_, ms] : stages_) total += ms;
    return total;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, double>> stages_;
};

// JSON config file: keys are long option names; command-line flags win.
json load_config_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail_validation(path + ": " + e.what());
  }
  return j;
}

void apply_config(CLI::App* cmd, const json& cfg) {
  if (cfg.is_null()) return;
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt || opt->count() > 0) continue;  // flags win
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    opt->add_result(text);
    opt->run_callback();
  }
}

int run_init(const std::string& out_dir, int size, const std::string& params_path) {
  fs::create_directories(out_dir);
  Rig rig = make_default_rig();
  if (size != 1024) rig = rig.scaled_to(size);
  Image atlas = make_default_atlas(make_default_rig());

  ParamVector fixture_params = ParamVector::zeros(rig.component_ids());
  if (!params_path.empty()) fixture_params = load_params_json(params_path);

  fs::path base(out_dir);
  save_rig(rig, (base / "rig.json").string());
  write_png(atlas, (base / "atlas.png").string());
  std::ofstream((base / "mapping.json").string()) << default_mapping_json();
  std::ofstream((base / "timeline.json").string()) << default_timeline_json();

  Fixture fx = make_fixture(rig, atlas, fixture_params);
  write_png(fx.portrait, (base / "portrait.png").string());
  save_landmarks_json(fx.landmarks, rig.canvas_size, rig.canvas_size,
                      (base / "portrait_landmarks.json").string());
  save_params_json(fixture_params, (base / "portrait_params.json").string());
  std::printf("wrote template rig, atlas, mapping, timeline and fixture to %s\n",
              out_dir.c_str());
  return 0;
}

int run_synth(const std::string& rig_path, const std::string& out_path, size_t n,
              uint64_t seed, int size, int workers) {
  Rig rig = load_rig(rig_path);
  if (size > 0 && size != rig.canvas_size) rig = rig.scaled_to(size);
  Dataset ds = build_dataset(rig, n, seed, workers);
  save_dataset(ds, out_path);
  std::printf("dataset: %zu samples (%u dropped), rig %s, seed %llu -> %s\n",
              ds.samples.size(), ds.dropped, hex64(ds.rig_fingerprint).c_str(),
              static_cast<unsigned long long>(seed), out_path.c_str());
  return 0;
}

int run_train(const std::string& dataset_path, const std::string& rig_path,
              const std::string& out_path, TrainConfig cfg,
              std::vector<int> hidden, int size) {
  Dataset ds = load_dataset(dataset_path);
  Rig rig = load_rig(rig_path);
  if (size > 0 && size != rig.canvas_size) rig = rig.scaled_to(size);
  if (rig.fingerprint() != ds.rig_fingerprint)
    fail_validation("dataset was generated from a different rig (fingerprint " +
                    hex64(ds.rig_fingerprint) + " vs " + hex64(rig.fingerprint()) + ")");
  if (hidden.size() != 3) fail_validation("--hidden needs exactly 3 sizes");

  MlpModel model = init_model_for_rig(rig, {hidden[0], hidden[1], hidden[2]}, cfg.seed);
  TrainResult result = train(model, ds, cfg);
  save_model(model, out_path);
  std::printf("trained %d epochs; final train MSE %.3e, val MSE %.3e -> %s\n",
              result.epochs_run, result.train_loss.back(), result.val_loss.back(),
              out_path.c_str());
  return 0;
}

int run_fit(const std::string& rig_path, const std::string& model_path,
            const std::string& portrait_path, const std::string& landmarks_path,
            const std::string& out_dir, const std::string& hair_image_path,
            const std::string& hair_mask_path, const std::string& hair_z,
            const std::string& render_landmarks_path, int dilation,
            int alpha_threshold, int workers) {
  if (alpha_threshold < 0 || alpha_threshold > 255)
    fail_validation("--alpha-threshold must be in [0, 255]");
  StageClock clock;
  Rig rig = load_rig(rig_path);
  MlpModel model = load_model(model_path);
  Image portrait = read_png(portrait_path);
  LandmarkSet landmarks = load_landmarks_json(landmarks_path);
  clock.mark("load");

  ModelPackage pkg = begin_package(rig, portrait, landmarks, 2048, 1024);
  pkg.provenance.input_hash = hash_file(portrait_path);
  pkg.provenance.model_file_hash = hash_file(model_path);
  clock.mark("align");

  std::optional<LandmarkSet> render_landmarks;
  if (!render_landmarks_path.empty())
    render_landmarks = load_landmarks_json(render_landmarks_path);
  fit_portrait(pkg, model, render_landmarks);
  clock.mark("predict");

  repaint_base_face(pkg, dilation, {.workers = workers}, alpha_threshold);
  clock.mark("repaint");

  if (!hair_image_path.empty()) {
    Image hair_img = read_png(hair_image_path);
    BinaryMask hair_mask = read_mask_png(hair_mask_path);
    if (hair_occludes_eyebrows(pkg, hair_mask))
      std::fprintf(stderr,
                   "{\"warning\":\"hair mask overlaps an eyebrow box; supply a "
                   "pre-cleaned portrait for best results\"}\n");
    integrate_hair(pkg, hair_img, hair_mask,
                   hair_z == "behind" ? HairZ::behind_face : HairZ::front);
  }
  clock.mark("hair");

  save_package(pkg, out_dir);
  clock.mark("save");
  clock.print();
  return 0;
}

int run_render(const std::string& package_dir, const std::string& out_path,
               const std::string& params_path, int workers) {
  ModelPackage pkg = load_package(package_dir);
  ParamVector params = pkg.fitted_params;
  if (!params_path.empty()) params = load_params_json(params_path);
  Image img = render(pkg.rig, pkg.atlas, params, std::nullopt, {.workers = workers});
  write_png(img, out_path);
  std::printf("rendered %s\n", out_path.c_str());
  return 0;
}

int run_animate(const std::string& package_dir, const std::string& timeline_path,
                const std::string& mapping_path, const std::string& out_dir,
                int workers) {
  ModelPackage pkg = load_package(package_dir);
  std::vector<ExpressionFrame> frames = load_timeline(timeline_path);
  ExpressionMapping mapping =
      mapping_path.empty() ? make_default_mapping() : load_mapping(mapping_path);
  validate_mapping(mapping, pkg.rig);
  fs::create_directories(out_dir);
  std::vector<Image> images = render_timeline(pkg, frames, mapping, workers);
  char name[32];
  for (size_t i = 0; i < images.size(); ++i) {
    std::snprintf(name, sizeof(name), "frame_%05zu.png", i);
    write_png(images[i], (fs::path(out_dir) / name).string());
  }
  std::printf("wrote %zu frames to %s\n", images.size(), out_dir.c_str());
  return 0;
}

int run_verify(const std::string& package_dir) {
  ModelPackage pkg = load_package(package_dir);  // checks hashes + params
  validate_rig(pkg.rig);
  // Atlas must cover every rect.
  auto check_rect = [&](const Rect& r, const std::string& id) {
    if (r.x < 0 || r.y < 0 || r.x + r.w > pkg.atlas.width || r.y + r.h > pkg.atlas.height)
      fail_validation("atlas does not cover texture rect of '" + id + "'");
  };
  for (const auto& c : pkg.rig.components) check_rect(c.texture_rect, c.id);
  check_rect(pkg.rig.base_face.texture_rect, pkg.rig.base_face.id);
  if (pkg.rig.hair) check_rect(pkg.rig.hair->texture_rect, pkg.rig.hair->id);

  json report{{"package", package_dir},
              {"canvas_size", pkg.rig.canvas_size},
              {"components", pkg.rig.components.size()},
              {"tool_version", pkg.provenance.tool_version},
              {"hashes_ok", true},
              {"params_ok", true}};
  std::printf("%s\n", report.dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layered-2D character builder"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags win)")
      ->envname("TOONRIG_CONFIG");

  int workers = 0;
  app.add_option("--workers", workers, "worker threads (0 = hardware)")
      ->envname("TOONRIG_WORKERS");

  // init
  auto* init = app.add_subcommand("init", "write the default rig, atlas and fixtures");
  std::string init_out = "assets";
  int init_size = 1024;
  std::string init_params;
  init->add_option("--out", init_out, "output directory");
  init->add_option("--size", init_size, "canvas size")->envname("TOONRIG_SIZE");
  init->add_option("--params", init_params, "fixture weights (params.json)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic training dataset");
  std::string synth_rig, synth_out = "dataset.trds";
  size_t synth_n = 10000;
  uint64_t synth_seed = 0;
  int synth_size = 0;
  synth->add_option("--rig", synth_rig, "rig file")->required();
  synth->add_option("--out", synth_out, "output dataset file");
  synth->add_option("--n", synth_n, "sample count");
  synth->add_option("--seed", synth_seed, "RNG seed")->required()->envname("TOONRIG_SEED");
  synth->add_option("--size", synth_size, "render canvas size (0 = rig's)")
      ->envname("TOONRIG_SIZE");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the landmark->parameter regressor");
  std::string train_dataset, train_rig, train_out = "model.trnn";
  TrainConfig tcfg;
  std::vector<int> hidden = {256, 256, 128};
  int train_size = 0;
  train_cmd->add_option("--dataset", train_dataset, "dataset file")->required();
  train_cmd->add_option("--rig", train_rig, "rig file")->required();
  train_cmd->add_option("--out", train_out, "output model file");
  train_cmd->add_option("--seed", tcfg.seed, "RNG seed")->required()->envname("TOONRIG_SEED");
  train_cmd->add_option("--epochs", tcfg.epochs, "max epochs");
  train_cmd->add_option("--batch", tcfg.batch_size, "batch size");
  train_cmd->add_option("--lr", tcfg.learning_rate, "learning rate");
  train_cmd->add_option("--val-fraction", tcfg.validation_fraction, "validation fraction");
  train_cmd->add_option("--patience", tcfg.patience, "early-stop patience (epochs)");
  train_cmd->add_option("--plateau", tcfg.plateau_epochs, "epochs before halving lr");
  train_cmd->add_option("--hidden", hidden, "hidden layer sizes (3)");
  train_cmd->add_option("--size", train_size, "canvas size the dataset was rendered at")
      ->envname("TOONRIG_SIZE");

  // fit
  auto* fit = app.add_subcommand("fit", "build a character package from a portrait");
  std::string fit_rig, fit_model, fit_portrait_path, fit_landmarks, fit_out = "package";
  std::string fit_hair_image, fit_hair_mask, fit_hair_z = "front", fit_render_landmarks;
  int fit_dilation = 3;
  int fit_alpha_threshold = kAlphaThreshold;
  fit->add_option("--rig", fit_rig, "rig file")->required();
  fit->add_option("--model", fit_model, "trained model file")->required();
  fit->add_option("--portrait", fit_portrait_path, "aligned portrait PNG")->required();
  fit->add_option("--landmarks", fit_landmarks, "portrait landmark JSON")->required();
  fit->add_option("--out", fit_out, "output package directory");
  fit->add_option("--hair-image", fit_hair_image, "hair source image (aligned frame)");
  fit->add_option("--hair-mask", fit_hair_mask, "hair mask PNG (aligned frame)");
  fit->add_option("--hair-z", fit_hair_z, "front|behind")
      ->check(CLI::IsMember({"front", "behind"}));
  fit->add_option("--render-landmarks", fit_render_landmarks,
                  "external landmark file for the base-face render");
  fit->add_option("--dilation", fit_dilation, "repaint mask dilation (px)");
  fit->add_option("--alpha-threshold", fit_alpha_threshold,
                  "mask alpha coverage cutoff (0-255)");

  // render
  auto* render_cmd = app.add_subcommand("render", "render a package to PNG");
  std::string render_pkg, render_out = "render.png", render_params;
  render_cmd->add_option("--package", render_pkg, "package directory")->required();
  render_cmd->add_option("--out", render_out, "output PNG");
  render_cmd->add_option("--params", render_params, "override params.json");

  // animate
  auto* animate = app.add_subcommand("animate", "render an expression timeline");
  std::string anim_pkg, anim_timeline, anim_mapping, anim_out = "frames";
  animate->add_option("--package", anim_pkg, "package directory")->required();
  animate->add_option("--timeline", anim_timeline, "timeline JSON")->required();
  animate->add_option("--mapping", anim_mapping, "mapping JSON (default built-in)");
  animate->add_option("--out", anim_out, "output frame directory");

  // verify
  auto* verify = app.add_subcommand("verify", "re-check package invariants and hashes");
  std::string verify_pkg;
  verify->add_option("--package", verify_pkg, "package directory")->required();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
      json err{{"error", {{"kind", "validation"}, {"message", e.what()}}}};
      std::cerr << err.dump() << "\n";
      return 2;
    }

    if (!config_path.empty()) {
      json cfg = load_config_json(config_path);
      for (CLI::App* sub : {init, synth, train_cmd, fit, render_cmd, animate, verify})
        if (sub->parsed()) apply_config(sub, cfg);
      if (cfg.contains("workers") && app.get_option("--workers")->count() == 0)
        workers = cfg.at("workers").get<int>();
    }
    set_default_workers(workers);

    if (init->parsed()) return run_init(init_out, init_size, init_params);
    if (synth->parsed())
      return run_synth(synth_rig, synth_out, synth_n, synth_seed, synth_size, workers);
    if (train_cmd->parsed())
      return run_train(train_dataset, train_rig, train_out, tcfg, hidden, train_size);
    if (fit->parsed()) {
      if (!fit_hair_image.empty() && fit_hair_mask.empty())
        fail_validation("--hair-image requires --hair-mask");
      return run_fit(fit_rig, fit_model, fit_portrait_path, fit_landmarks, fit_out,
                     fit_hair_image, fit_hair_mask, fit_hair_z, fit_render_landmarks,
                     fit_dilation, fit_alpha_threshold, workers);
    }
    if (render_cmd->parsed())
      return run_render(render_pkg, render_out, render_params, workers);
    if (animate->parsed())
      return run_animate(anim_pkg, anim_timeline, anim_mapping, anim_out, workers);
    if (verify->parsed()) return run_verify(verify_pkg);
    return 2;
  } catch (const Error& e) {
    json err{{"error",
              {{"kind", e.kind() == ErrorKind::validation ? "validation" : "runtime"},
               {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return e.kind() == ErrorKind::validation ? 2 : 3;
  } catch (const std::exception& e) {
    json err{{"error", {{"kind", "runtime"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
}
