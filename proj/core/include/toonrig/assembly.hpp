#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "toonrig/align.hpp"
#include "toonrig/image.hpp"
#include "toonrig/inpaint.hpp"
#include "toonrig/mlp.hpp"
#include "toonrig/raster.hpp"
#include "toonrig/rig.hpp"

namespace toonrig {

struct Provenance {
  uint64_t input_hash = 0;       // portrait file bytes
  uint64_t model_file_hash = 0;  // regressor file bytes
  int64_t created_at = 0;        // unix seconds; SOURCE_DATE_EPOCH wins
  std::string tool_version;
  std::map<std::string, uint64_t> file_hashes;  // package file -> fnv1a64
};

/// Finished character: rig + atlas (mapped base face, extracted feature
/// textures, hair), fitted weights, repaint mask, provenance.
struct ModelPackage {
  Rig rig;
  Image atlas;
  ParamVector fitted_params;
  BinaryMask repaint_mask;  // canvas space
  Provenance provenance;

  // Fit-time state carried between pipeline stages (not serialized).
  std::optional<AlignedPortrait> aligned;
  std::optional<SimilarityTransform> contour_transform;
};

/// Starts a package: aligns the portrait, extracts all component textures and
/// the base face into a fresh atlas sized like the rig's.
ModelPackage begin_package(const Rig& rig, const Image& portrait,
                           const LandmarkSet& portrait_landmarks,
                           int atlas_w, int atlas_h);

/// Renders the base-face-only image, obtains its landmarks (default: the
/// portrait's landmarks pushed through the contour transform; or an external
/// landmark set for the render), predicts parameters, stores them.
/// base_face_render, when non-null, receives the render.
ParamVector fit_portrait(ModelPackage& pkg, const MlpModel& model,
                         const std::optional<LandmarkSet>& render_landmarks = std::nullopt,
                         Image* base_face_render = nullptr);

/// render_mask over all feature layers at the given params, dilated.
BinaryMask repaint_mask(const Rig& rig, const Image& atlas, const ParamVector& params,
                        int dilation_px = 3, int workers = 0,
                        int alpha_threshold = kAlphaThreshold);

/// Pulls the repaint mask back into base-face texture space and inpaints the
/// base texture under it; stores the canvas-space mask in the package.
void repaint_base_face(ModelPackage& pkg, int dilation_px = 3,
                       const InpaintOptions& inpaint_opts = {},
                       int alpha_threshold = kAlphaThreshold);

enum class HairZ { front, behind_face };

/// Warps hair pixels (alpha from the mask) through the contour transform into
/// the rig's hair layer rect and places the layer at the requested z slot.
/// The hair inputs must share the aligned portrait's frame.
void integrate_hair(ModelPackage& pkg, const Image& hair_image,
                    const BinaryMask& hair_mask, HairZ z);

/// True when the hair mask overlaps an eyebrow bounding box (mapped back into
/// the portrait frame) — the caller should supply a pre-cleaned portrait.
bool hair_occludes_eyebrows(const ModelPackage& pkg, const BinaryMask& hair_mask);

// Package directory: rig.json, atlas.png, params.json, repaint_mask.png,
// provenance.json. Hashes verified on load.
void save_package(const ModelPackage& pkg, const std::string& dir);
ModelPackage load_package(const std::string& dir);

/// Resolves the provenance timestamp (SOURCE_DATE_EPOCH env override).
int64_t provenance_timestamp();

}  // namespace toonrig
