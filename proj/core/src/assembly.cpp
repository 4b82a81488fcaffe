#include "toonrig/assembly.hpp"

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "toonrig/error.hpp"
#include "toonrig/hash.hpp"
#include "toonrig/raster.hpp"
#include "toonrig/version.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace toonrig {

int64_t provenance_timestamp() {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0') return static_cast<int64_t>(v);
  }
  return static_cast<int64_t>(std::time(nullptr));
}

namespace {

void blit(Image& atlas, const Image& patch, const Rect& rect) {
  if (rect.x < 0 || rect.y < 0 || rect.x + rect.w > atlas.width ||
      rect.y + rect.h > atlas.height)
    fail_validation("texture rect outside atlas bounds");
  if (patch.width != rect.w || patch.height != rect.h)
    fail_validation("texture patch does not match its rect");
  for (int y = 0; y < rect.h; ++y)
    std::copy(patch.at(0, y), patch.at(0, y) + static_cast<size_t>(rect.w) * 4,
              atlas.at(rect.x, rect.y + y));
}

}  // namespace

ModelPackage begin_package(const Rig& rig, const Image& portrait,
                           const LandmarkSet& portrait_landmarks,
                           int atlas_w, int atlas_h) {
  ModelPackage pkg;
  pkg.rig = rig;
  pkg.atlas = Image(atlas_w, atlas_h);
  pkg.fitted_params = ParamVector::zeros(rig.component_ids());
  pkg.repaint_mask = BinaryMask(rig.canvas_size, rig.canvas_size);
  pkg.provenance.tool_version = kVersion;

  pkg.aligned = eye_level(portrait, portrait_landmarks);
  for (const auto& c : rig.components) {
    TexturePatch patch = extract_component_texture(*pkg.aligned, c, rig);
    blit(pkg.atlas, patch.texture, patch.placement);
  }
  BaseFaceMap base = map_base_face(*pkg.aligned, rig);
  blit(pkg.atlas, base.texture, rig.base_face.texture_rect);
  pkg.contour_transform = base.portrait_to_canvas;
  return pkg;
}

ParamVector fit_portrait(ModelPackage& pkg, const MlpModel& model,
                         const std::optional<LandmarkSet>& render_landmarks,
                         Image* base_face_render) {
  if (!pkg.contour_transform)
    fail_validation("fit_portrait: package has no mapped base face yet");
  // The model may have been trained at another canvas size of the same
  // template (landmarks are normalized), so only the landmark schema is
  // enforced, not the rig fingerprint.

  Image render_img = render(pkg.rig, pkg.atlas, ParamVector::zeros(pkg.rig.component_ids()),
                            std::set<std::string>{pkg.rig.base_face.id});
  if (base_face_render) *base_face_render = render_img;

  LandmarkSet canvas_landmarks;
  if (render_landmarks) {
    canvas_landmarks = *render_landmarks;
  } else {
    // The base-face render is the portrait warped by the contour transform,
    // so a perfect detector on it returns exactly the transformed landmarks.
    if (!pkg.aligned) fail_validation("fit_portrait: no aligned portrait available");
    const SimilarityTransform& t = *pkg.contour_transform;
    for (const auto& id : model.landmark_schema) {
      Vec2 px = pkg.aligned->landmark_px(id);  // throws naming the absent id
      Vec2 cp = t.apply(px);
      canvas_landmarks.points[id] = cp * (1.0 / pkg.rig.canvas_size);
      auto git = pkg.aligned->landmarks.grouping.find(id);
      canvas_landmarks.grouping[id] =
          git != pkg.aligned->landmarks.grouping.end() ? git->second : "";
    }
  }

  pkg.fitted_params = predict_params(model, canvas_landmarks);
  return pkg.fitted_params;
}

BinaryMask repaint_mask(const Rig& rig, const Image& atlas, const ParamVector& params,
                        int dilation_px, int workers, int alpha_threshold) {
  std::set<std::string> features;
  for (const auto& c : rig.components) features.insert(c.id);
  BinaryMask mask = render_mask(rig, atlas, params, features,
                                {.workers = workers, .alpha_threshold = alpha_threshold});
  return dilate(mask, dilation_px);
}

void repaint_base_face(ModelPackage& pkg, int dilation_px,
                       const InpaintOptions& inpaint_opts, int alpha_threshold) {
  auto violations = validate_params(pkg.fitted_params, pkg.rig);
  if (!violations.empty())
    fail_validation("repaint_base_face: " + violations.front().message);

  BinaryMask canvas_mask = repaint_mask(pkg.rig, pkg.atlas, pkg.fitted_params,
                                        dilation_px, inpaint_opts.workers, alpha_threshold);

  // Pull the canvas mask back into base-face texture space through the
  // rect <-> mesh-bounds map.
  const Rect& rect = pkg.rig.base_face.texture_rect;
  Bounds bounds = Bounds::of(pkg.rig.base_face.rest_mesh.vertices);
  BinaryMask tex_mask(rect.w, rect.h);
  double sx = rect.w > 0 ? bounds.width() / rect.w : 0.0;
  double sy = rect.h > 0 ? bounds.height() / rect.h : 0.0;
  for (int ty = 0; ty < rect.h; ++ty) {
    for (int tx = 0; tx < rect.w; ++tx) {
      int cx = static_cast<int>(std::floor(bounds.min_x + (tx + 0.5) * sx));
      int cy = static_cast<int>(std::floor(bounds.min_y + (ty + 0.5) * sy));
      if (canvas_mask.in_bounds(cx, cy) && canvas_mask.get(cx, cy))
        tex_mask.set(tx, ty, true);
    }
  }

  // Inpaint the base texture region under the mask.
  Image base_tex(rect.w, rect.h);
  for (int y = 0; y < rect.h; ++y)
    std::copy(pkg.atlas.at(rect.x, rect.y + y),
              pkg.atlas.at(rect.x, rect.y + y) + static_cast<size_t>(rect.w) * 4,
              base_tex.at(0, y));
  Image repainted = inpaint(base_tex, tex_mask, inpaint_opts);
  blit(pkg.atlas, repainted, rect);

  pkg.repaint_mask = std::move(canvas_mask);
}

bool hair_occludes_eyebrows(const ModelPackage& pkg, const BinaryMask& hair_mask) {
  if (!pkg.contour_transform || !pkg.aligned) return false;
  SimilarityTransform inv = pkg.contour_transform->inverse();
  double canvas = pkg.rig.canvas_size;
  for (const auto& c : pkg.rig.components) {
    if (c.id.find("eyebrow") == std::string::npos) continue;
    std::vector<Vec2> pts;
    for (const auto& lid : c.landmark_ids) {
      Vec2 p = pkg.rig.template_landmarks.points.at(lid);
      pts.push_back({p.x * canvas, p.y * canvas});
    }
    Bounds box = Bounds::of(pts).dilated(3.0 * kCropMarginAt1024 * canvas / 1024.0);
    for (int y = static_cast<int>(box.min_y); y <= static_cast<int>(box.max_y); y += 2) {
      for (int x = static_cast<int>(box.min_x); x <= static_cast<int>(box.max_x); x += 2) {
        Vec2 portrait_pt = inv.apply({static_cast<double>(x), static_cast<double>(y)});
        int px = static_cast<int>(std::floor(portrait_pt.x));
        int py = static_cast<int>(std::floor(portrait_pt.y));
        if (hair_mask.in_bounds(px, py) && hair_mask.get(px, py)) return true;
      }
    }
  }
  return false;
}

void integrate_hair(ModelPackage& pkg, const Image& hair_image,
                    const BinaryMask& hair_mask, HairZ z) {
  if (!pkg.rig.hair)
    fail_validation("integrate_hair: rig has no hair layer");
  if (!pkg.contour_transform)
    fail_validation("integrate_hair: package has no contour transform yet");
  if (hair_image.width != hair_mask.width || hair_image.height != hair_mask.height)
    fail_validation("integrate_hair: hair image and mask dimensions differ");
  if (pkg.aligned && (hair_image.width != pkg.aligned->image.width ||
                      hair_image.height != pkg.aligned->image.height))
    fail_validation("integrate_hair: hair inputs do not share the aligned portrait frame");

  const Rect& rect = pkg.rig.hair->texture_rect;
  Bounds bounds = Bounds::of(pkg.rig.hair->rest_mesh.vertices);
  SimilarityTransform inv = pkg.contour_transform->inverse();
  Image tex(rect.w, rect.h);
  double sx = rect.w > 0 ? bounds.width() / rect.w : 0.0;
  double sy = rect.h > 0 ? bounds.height() / rect.h : 0.0;
  for (int ty = 0; ty < rect.h; ++ty) {
    for (int tx = 0; tx < rect.w; ++tx) {
      Vec2 canvas_pt{bounds.min_x + (tx + 0.5) * sx, bounds.min_y + (ty + 0.5) * sy};
      Vec2 src = inv.apply(canvas_pt);
      int mx = static_cast<int>(std::floor(src.x));
      int my = static_cast<int>(std::floor(src.y));
      if (!hair_mask.in_bounds(mx, my) || !hair_mask.get(mx, my)) continue;
      std::array<double, 4> v = hair_image.sample_bilinear(src.x, src.y);
      tex.set(tx, ty, {static_cast<uint8_t>(std::lround(v[0])),
                       static_cast<uint8_t>(std::lround(v[1])),
                       static_cast<uint8_t>(std::lround(v[2])), 255});
    }
  }
  blit(pkg.atlas, tex, rect);

  // Re-slot the hair layer in z order.
  std::vector<std::string>& zo = pkg.rig.z_order;
  zo.erase(std::remove(zo.begin(), zo.end(), pkg.rig.hair->id), zo.end());
  if (z == HairZ::front) {
    zo.push_back(pkg.rig.hair->id);
  } else {
    auto it = std::find(zo.begin(), zo.end(), pkg.rig.base_face.id);
    zo.insert(it, pkg.rig.hair->id);
  }
}

// --- package directory -------------------------------------------------------

void save_package(const ModelPackage& pkg, const std::string& dir) {
  auto violations = validate_params(pkg.fitted_params, pkg.rig);
  if (!violations.empty())
    fail_validation("save_package: invalid fitted params: " + violations.front().message);

  fs::create_directories(dir);
  fs::path base(dir);
  save_rig(pkg.rig, (base / "rig.json").string());
  write_png(pkg.atlas, (base / "atlas.png").string());
  save_params_json(pkg.fitted_params, (base / "params.json").string());
  write_mask_png(pkg.repaint_mask, (base / "repaint_mask.png").string());

  json prov;
  prov["input_hash"] = hex64(pkg.provenance.input_hash);
  prov["model_file_hash"] = hex64(pkg.provenance.model_file_hash);
  prov["created_at"] = provenance_timestamp();
  prov["tool_version"] = kVersion;
  json hashes = json::object();
  for (const char* name : {"rig.json", "atlas.png", "params.json", "repaint_mask.png"})
    hashes[name] = hex64(hash_file((base / name).string()));
  prov["file_hashes"] = hashes;
  std::ofstream out(base / "provenance.json", std::ios::binary);
  if (!out) fail_runtime("cannot write provenance.json");
  out << prov.dump(2) << "\n";
}

ModelPackage load_package(const std::string& dir) {
  fs::path base(dir);
  for (const char* name :
       {"rig.json", "atlas.png", "params.json", "repaint_mask.png", "provenance.json"})
    if (!fs::exists(base / name))
      fail_runtime("package missing file: " + std::string(name));

  std::ifstream in(base / "provenance.json", std::ios::binary);
  json prov;
  try {
    in >> prov;
  } catch (const json::parse_error& e) {
    fail_validation("provenance.json: " + std::string(e.what()));
  }
  for (const auto& [name, hex] : prov.at("file_hashes").items()) {
    uint64_t actual = hash_file((base / name).string());
    if (hex64(actual) != hex.get<std::string>())
      fail_runtime("package hash mismatch for " + name + ": expected " +
                   hex.get<std::string>() + ", got " + hex64(actual));
  }

  ModelPackage pkg;
  pkg.rig = load_rig((base / "rig.json").string());
  pkg.atlas = read_png((base / "atlas.png").string());
  pkg.fitted_params = load_params_json((base / "params.json").string());
  pkg.repaint_mask = read_mask_png((base / "repaint_mask.png").string());
  pkg.provenance.input_hash = std::stoull(prov.at("input_hash").get<std::string>(), nullptr, 16);
  pkg.provenance.model_file_hash =
      std::stoull(prov.at("model_file_hash").get<std::string>(), nullptr, 16);
  pkg.provenance.created_at = prov.at("created_at").get<int64_t>();
  pkg.provenance.tool_version = prov.at("tool_version").get<std::string>();
  for (const auto& [name, hex] : prov.at("file_hashes").items())
    pkg.provenance.file_hashes[name] = std::stoull(hex.get<std::string>(), nullptr, 16);

  auto violations = validate_params(pkg.fitted_params, pkg.rig);
  if (!violations.empty())
    fail_validation("package params invalid: " + violations.front().message);
  if (pkg.repaint_mask.width != pkg.rig.canvas_size ||
      pkg.repaint_mask.height != pkg.rig.canvas_size)
    fail_validation("package repaint mask does not match the rig canvas");
  return pkg;
}

}  // namespace toonrig
