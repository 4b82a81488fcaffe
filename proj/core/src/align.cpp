#include "toonrig/align.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "toonrig/error.hpp"

using nlohmann::json;

namespace toonrig {

Vec2 AlignedPortrait::landmark_px(const std::string& id) const {
  auto it = landmarks.points.find(id);
  if (it == landmarks.points.end())
    fail_validation("portrait landmarks missing '" + id + "'");
  return {it->second.x * image.width, it->second.y * image.height};
}

namespace {

std::vector<std::string> group_ids_or_fail(const LandmarkSet& ls, const std::string& group) {
  std::vector<std::string> ids = ls.ids_in_group(group);
  if (ids.empty()) fail_validation("missing landmark group '" + group + "'");
  return ids;
}

Vec2 group_centroid_px(const LandmarkSet& ls, const std::string& group, int w, int h) {
  Vec2 c = ls.group_centroid(group);
  return {c.x * w, c.y * h};
}

}  // namespace

AlignedPortrait eye_level(const Image& image, const LandmarkSet& landmarks) {
  group_ids_or_fail(landmarks, "left_eye");
  group_ids_or_fail(landmarks, "right_eye");
  Vec2 left = group_centroid_px(landmarks, "left_eye", image.width, image.height);
  Vec2 right = group_centroid_px(landmarks, "right_eye", image.width, image.height);
  double theta = std::atan2(right.y - left.y, right.x - left.x);

  AlignedPortrait out;
  out.rotation_applied = -theta;
  if (std::abs(theta) < 1e-9) {  // already level
    out.image = image;
    out.landmarks = landmarks;
    out.rotation_applied = 0.0;
    return out;
  }

  Vec2 pivot = (left + right) * 0.5;
  double c = std::cos(-theta), s = std::sin(-theta);
  auto fwd = [&](const Vec2& p) -> Vec2 {
    Vec2 d = p - pivot;
    return {pivot.x + c * d.x - s * d.y, pivot.y + s * d.x + c * d.y};
  };

  // Pad the canvas to the rotated bounding box of the original frame.
  Vec2 corners[4] = {{0, 0},
                     {static_cast<double>(image.width), 0},
                     {0, static_cast<double>(image.height)},
                     {static_cast<double>(image.width), static_cast<double>(image.height)}};
  double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
  for (const Vec2& corner : corners) {
    Vec2 r = fwd(corner);
    min_x = std::min(min_x, r.x);
    min_y = std::min(min_y, r.y);
    max_x = std::max(max_x, r.x);
    max_y = std::max(max_y, r.y);
  }
  int out_w = static_cast<int>(std::ceil(max_x - min_x));
  int out_h = static_cast<int>(std::ceil(max_y - min_y));
  Vec2 shift{-min_x, -min_y};

  out.image = Image(out_w, out_h);
  double ci = std::cos(theta), si = std::sin(theta);  // inverse rotation
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      Vec2 p{x + 0.5 - shift.x, y + 0.5 - shift.y};
      Vec2 d = p - pivot;
      Vec2 src{pivot.x + ci * d.x - si * d.y, pivot.y + si * d.x + ci * d.y};
      std::array<double, 4> v = image.sample_bilinear(src.x, src.y);
      out.image.set(x, y, {static_cast<uint8_t>(std::lround(v[0])),
                           static_cast<uint8_t>(std::lround(v[1])),
                           static_cast<uint8_t>(std::lround(v[2])),
                           static_cast<uint8_t>(std::lround(v[3]))});
    }
  }

  for (const auto& [id, pn] : landmarks.points) {
    Vec2 p = fwd({pn.x * image.width, pn.y * image.height}) + shift;
    out.landmarks.points[id] = {p.x / out_w, p.y / out_h};
  }
  out.landmarks.grouping = landmarks.grouping;
  return out;
}

namespace {

struct CropRegion {
  std::vector<Vec2> hull;  // canvas px; empty when bbox-only
  Bounds bbox{};
  bool use_bbox = false;
  double margin = 0.0;

  bool contains(const Vec2& p) const {
    if (use_bbox) return bbox.contains(p.x, p.y);
    return distance_to_hull(hull, p) <= margin;
  }
};

// Pulls portrait pixels into a texture rect: texel -> canvas point (rect to
// mesh-bounds map) -> portrait point (inverse similarity) -> bilinear sample.
Image pull_texture(const AlignedPortrait& portrait, const Rect& rect,
                   const Bounds& mesh_bounds, const SimilarityTransform& to_canvas,
                   const CropRegion& crop) {
  SimilarityTransform inv = to_canvas.inverse();
  Image tex(rect.w, rect.h);
  double sx = rect.w > 0 ? mesh_bounds.width() / rect.w : 0.0;
  double sy = rect.h > 0 ? mesh_bounds.height() / rect.h : 0.0;
  for (int ty = 0; ty < rect.h; ++ty) {
    for (int tx = 0; tx < rect.w; ++tx) {
      Vec2 canvas_pt{mesh_bounds.min_x + (tx + 0.5) * sx,
                     mesh_bounds.min_y + (ty + 0.5) * sy};
      if (!crop.contains(canvas_pt)) continue;  // stays transparent
      Vec2 src = inv.apply(canvas_pt);
      std::array<double, 4> v = portrait.image.sample_bilinear(src.x, src.y);
      tex.set(tx, ty, {static_cast<uint8_t>(std::lround(v[0])),
                       static_cast<uint8_t>(std::lround(v[1])),
                       static_cast<uint8_t>(std::lround(v[2])),
                       static_cast<uint8_t>(std::lround(v[3]))});
    }
  }
  return tex;
}

}  // namespace

TexturePatch extract_component_texture(const AlignedPortrait& portrait,
                                       const Component& component,
                                       const Rig& rig) {
  if (component.landmark_ids.size() < 2)
    fail_validation("component " + component.id + " has too few landmarks to fit");
  std::vector<Vec2> src, dst;
  for (const auto& lid : component.landmark_ids) {
    src.push_back(portrait.landmark_px(lid));
    Vec2 t = rig.template_landmarks.points.at(lid);
    dst.push_back({t.x * rig.canvas_size, t.y * rig.canvas_size});
  }
  SimilarityTransform to_canvas = fit_similarity(src, dst);

  double margin = kCropMarginAt1024 * rig.canvas_size / 1024.0;
  CropRegion crop;
  std::vector<Vec2> canvas_pts;
  for (const auto& p : src) canvas_pts.push_back(to_canvas.apply(p));
  bool is_eyebrow = component.id.find("eyebrow") != std::string::npos;
  if (is_eyebrow) {
    crop.use_bbox = true;
    crop.bbox = Bounds::of(canvas_pts).dilated(3.0 * margin);
  } else {
    crop.hull = convex_hull(canvas_pts);
    crop.margin = margin;
  }

  TexturePatch patch;
  patch.placement = component.texture_rect;
  patch.portrait_to_canvas = to_canvas;
  patch.texture = pull_texture(portrait, component.texture_rect,
                               Bounds::of(component.rest_mesh.vertices), to_canvas, crop);
  return patch;
}

BaseFaceMap map_base_face(const AlignedPortrait& portrait, const Rig& rig) {
  std::vector<std::string> contour_ids =
      group_ids_or_fail(portrait.landmarks, "contour");
  std::vector<Vec2> src, dst;
  for (const auto& lid : contour_ids) {
    auto it = rig.template_landmarks.points.find(lid);
    if (it == rig.template_landmarks.points.end())
      fail_validation("contour landmark '" + lid + "' not in rig template");
    src.push_back(portrait.landmark_px(lid));
    dst.push_back({it->second.x * rig.canvas_size, it->second.y * rig.canvas_size});
  }
  SimilarityTransform to_canvas = fit_similarity(src, dst);

  CropRegion crop;
  std::vector<Vec2> canvas_pts;
  for (const auto& p : src) canvas_pts.push_back(to_canvas.apply(p));
  crop.hull = convex_hull(canvas_pts);
  crop.margin = kContourMarginAt1024 * rig.canvas_size / 1024.0;

  BaseFaceMap out;
  out.portrait_to_canvas = to_canvas;
  out.texture = pull_texture(portrait, rig.base_face.texture_rect,
                             Bounds::of(rig.base_face.rest_mesh.vertices), to_canvas, crop);
  return out;
}

LandmarkSet load_landmarks_json(const std::string& path, int* image_w, int* image_h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open landmark file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail_validation(path + ": " + e.what());
  }
  try {
    int w = j.at("image_size").at(0).get<int>();
    int h = j.at("image_size").at(1).get<int>();
    if (w <= 0 || h <= 0) fail_validation(path + ": image_size must be positive");
    if (image_w) *image_w = w;
    if (image_h) *image_h = h;
    LandmarkSet ls;
    for (const auto& [id, p] : j.at("points").items())
      ls.points[id] = {p.at(0).get<double>() / w, p.at(1).get<double>() / h};
    for (const auto& [g, ids] : j.at("groups").items())
      for (const auto& id : ids) {
        std::string lid = id.get<std::string>();
        if (!ls.points.count(lid))
          fail_validation(path + ": group '" + g + "' names unknown landmark '" + lid + "'");
        ls.grouping[lid] = g;
      }
    return ls;
  } catch (const json::exception& e) {
    fail_validation(path + ": " + e.what());
  }
}

void save_landmarks_json(const LandmarkSet& landmarks, int image_w, int image_h,
                         const std::string& path) {
  json points = json::object();
  for (const auto& [id, p] : landmarks.points)
    points[id] = {p.x * image_w, p.y * image_h};
  std::map<std::string, std::vector<std::string>> by_group;
  for (const auto& [id, g] : landmarks.grouping) by_group[g].push_back(id);
  json groups = json::object();
  for (auto& [g, ids] : by_group) {
    std::sort(ids.begin(), ids.end());
    groups[g] = ids;
  }
  json j{{"image_size", {image_w, image_h}}, {"points", points}, {"groups", groups}};
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_runtime("cannot write landmark file " + path);
  out << j.dump(2) << "\n";
}

}  // namespace toonrig
