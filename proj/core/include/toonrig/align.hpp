#pragma once

#include <string>

#include "toonrig/image.hpp"
#include "toonrig/rig.hpp"
#include "toonrig/similarity.hpp"

namespace toonrig {

/// Portrait rotated so the eye-group centroids are level, with landmarks in
/// the same (normalized) frame.
struct AlignedPortrait {
  Image image;
  LandmarkSet landmarks;       // normalized by image dims
  double rotation_applied = 0.0;  // radians

  Vec2 landmark_px(const std::string& id) const;  // pixel coords
};

/// Rotates image and landmarks by -atan2 of the eye centroid delta about the
/// eye midpoint; canvas is padded (transparent) so nothing crops.
AlignedPortrait eye_level(const Image& image, const LandmarkSet& landmarks);

/// Crop margin around component landmark hulls at the 1024 canvas; scales
/// proportionally. Eyebrows use a bounding box dilated by 3x this margin.
constexpr double kCropMarginAt1024 = 4.0;
/// Contour-polygon dilation for the base-face crop (covers the polygon-vs-
/// ellipse sagitta of the contour ring).
constexpr double kContourMarginAt1024 = 16.0;

struct TexturePatch {
  Image texture;  // texture_rect sized
  Rect placement;  // the component's rect in the atlas
  SimilarityTransform portrait_to_canvas;
};

/// Similarity-fits the portrait's component landmarks to the rig template,
/// pulls source pixels through the inverse map into the component's texture
/// rect (bilinear), and clears pixels outside the crop region (landmark
/// convex hull dilated by the margin; bounding box for eyebrows).
TexturePatch extract_component_texture(const AlignedPortrait& portrait,
                                       const Component& component,
                                       const Rig& rig);

struct BaseFaceMap {
  Image texture;  // base-face rect sized
  SimilarityTransform portrait_to_canvas;  // the contour transform
};

/// Contour-landmark similarity fit; warps the whole face region into the
/// base-face texture rect, transparent outside the (dilated) contour polygon.
BaseFaceMap map_base_face(const AlignedPortrait& portrait, const Rig& rig);

/// Landmark file: JSON with image_size, points (pixels), groups. Ids must
/// match the rig template schema where used.
LandmarkSet load_landmarks_json(const std::string& path, int* image_w = nullptr,
                                int* image_h = nullptr);
void save_landmarks_json(const LandmarkSet& landmarks, int image_w, int image_h,
                         const std::string& path);

}  // namespace toonrig
