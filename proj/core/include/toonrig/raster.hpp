#pragma once

#include <optional>
#include <set>
#include <string>

#include "toonrig/image.hpp"
#include "toonrig/rig.hpp"

namespace toonrig {

/// Mask alpha threshold: a layer "covers" a pixel when its sampled texel
/// alpha exceeds this (ignores anti-aliased fringe in source art).
constexpr int kAlphaThreshold = 8;

/// Marker disc radius at the reference 1024 canvas; scales proportionally.
constexpr double kMarkerRadiusAt1024 = 2.0;

struct RenderOptions {
  bool bilinear = false;  // default nearest-texel for bit-exact output
  int workers = 0;        // 0 = process default
  int alpha_threshold = kAlphaThreshold;  // mask coverage cutoff
};

/// Composites deformed, textured layers back-to-front per z_order onto a
/// transparent canvas. Triangles are texture-mapped from each layer's atlas
/// rect via barycentric interpolation (nearest texel by default), with
/// center-sample coverage and a top-left fill rule. When layer_filter is
/// given, layers not in it are skipped.
Image render(const Rig& rig, const Image& atlas, const ParamVector& params,
             const std::optional<std::set<std::string>>& layer_filter = std::nullopt,
             const RenderOptions& opts = {});

/// Bit set iff some selected layer covers the pixel with source alpha above
/// kAlphaThreshold. Selection must be a nonempty subset of rig layers.
BinaryMask render_mask(const Rig& rig, const Image& atlas, const ParamVector& params,
                       const std::set<std::string>& layer_selection,
                       const RenderOptions& opts = {});

/// Diagnostic render: opaque black canvas, each landmark drawn as a filled
/// white disc at its rest position displaced by its component's field.
/// Feature textures are not drawn. Empty subset means all template landmarks.
Image render_markers(const Rig& rig, const ParamVector& params,
                     const std::vector<std::string>& landmark_subset = {},
                     const RenderOptions& opts = {});

/// Landmark positions (canvas px) displaced exactly as render_markers places
/// them; the analytic oracle for marker fidelity checks.
std::map<std::string, Vec2> displaced_landmarks(const Rig& rig, const ParamVector& params);

/// Marker radius for a rig canvas (2 px at 1024, proportional elsewhere).
double marker_radius(int canvas_size);

/// Per-layer bounding box of the deformed mesh (canvas px).
Bounds layer_bounds(const Rig& rig, const DeformedGeometry& geo, const std::string& layer_id);

}  // namespace toonrig
