#include "toonrig/raster.hpp"

#include <cmath>

#include "toonrig/error.hpp"
#include "toonrig/parallel.hpp"

namespace toonrig {

double marker_radius(int canvas_size) {
  // Proportional above the reference size, floored at 2 px below it: blob
  // centroid quantization noise is constant in pixels, so discs smaller than
  // 2 px cannot meet the round-trip fidelity bound at reduced canvases.
  return std::max(kMarkerRadiusAt1024, kMarkerRadiusAt1024 * canvas_size / 1024.0);
}

Bounds layer_bounds(const Rig& rig, const DeformedGeometry& geo, const std::string& layer_id) {
  auto it = geo.layer_vertices.find(layer_id);
  if (it == geo.layer_vertices.end() || it->second.empty())
    fail_validation("no geometry for layer '" + layer_id + "'");
  (void)rig;
  return Bounds::of(it->second);
}

namespace {

struct LayerRef {
  const Mesh* mesh;
  Rect rect;
  const std::vector<Vec2>* deformed;
};

LayerRef layer_ref(const Rig& rig, const DeformedGeometry& geo, const std::string& id) {
  const Mesh* mesh = nullptr;
  Rect rect;
  if (id == rig.base_face.id) {
    mesh = &rig.base_face.rest_mesh;
    rect = rig.base_face.texture_rect;
  } else if (rig.hair && id == rig.hair->id) {
    mesh = &rig.hair->rest_mesh;
    rect = rig.hair->texture_rect;
  } else if (const Component* c = rig.find_component(id)) {
    mesh = &c->rest_mesh;
    rect = c->texture_rect;
  } else {
    fail_validation("z_order names unknown layer '" + id + "'");
  }
  return {mesh, rect, &geo.layer_vertices.at(id)};
}

// Rest-mesh bounds -> texture rect affine map gives per-vertex UVs. Collapsed
// extents map to the rect start.
std::vector<Vec2> layer_uvs(const Mesh& mesh, const Rect& rect) {
  Bounds b = Bounds::of(mesh.vertices);
  double sx = b.width() > 0 ? rect.w / b.width() : 0.0;
  double sy = b.height() > 0 ? rect.h / b.height() : 0.0;
  std::vector<Vec2> uvs;
  uvs.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices)
    uvs.push_back({rect.x + (v.x - b.min_x) * sx, rect.y + (v.y - b.min_y) * sy});
  return uvs;
}

inline uint8_t round_half_up_u8(double v) {
  double r = std::floor(v + 0.5);
  if (r < 0) r = 0;
  if (r > 255) r = 255;
  return static_cast<uint8_t>(r);
}

// Straight-alpha source-over of one sampled texel onto the canvas, rounded
// half-up per channel.
inline void over_pixel(uint8_t* dst, const double src[4]) {
  double at = src[3] / 255.0;
  if (at <= 0.0) return;
  double ab = dst[3] / 255.0;
  double ao = at + ab * (1.0 - at);
  for (int c = 0; c < 3; ++c)
    dst[c] = round_half_up_u8((src[c] * at + dst[c] * ab * (1.0 - at)) / ao);
  dst[3] = round_half_up_u8(ao * 255.0);
}

struct TriSetup {
  Vec2 a, b, c;     // canvas positions
  Vec2 ua, ub, uc;  // atlas positions
  double area2 = 0.0;
};

// Top-left fill rule on edge function e (counter-clockwise in y-down after
// orientation fix): pixels on a shared edge are drawn by exactly one triangle.
inline bool edge_covers(double e, const Vec2& from, const Vec2& to) {
  if (e > 0) return true;
  if (e < 0) return false;
  Vec2 d = to - from;
  // Top edge: horizontal, pointing left; left edge: pointing up (y-down: dy < 0).
  return (d.y == 0 && d.x < 0) || d.y < 0;
}

template <typename PixelFn>
void rasterize_triangle(const TriSetup& t, int width, int y_begin, int y_end,
                        PixelFn&& fn) {
  double min_x = std::min({t.a.x, t.b.x, t.c.x});
  double max_x = std::max({t.a.x, t.b.x, t.c.x});
  double min_y = std::max(static_cast<double>(y_begin), std::min({t.a.y, t.b.y, t.c.y}));
  double max_y = std::min(static_cast<double>(y_end), std::max({t.a.y, t.b.y, t.c.y}));
  int x0 = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
  int x1 = std::min(width - 1, static_cast<int>(std::ceil(max_x)));
  int y0 = std::max(y_begin, static_cast<int>(std::floor(min_y - 0.5)));
  int y1 = std::min(y_end - 1, static_cast<int>(std::ceil(max_y)));
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      Vec2 p{px + 0.5, py + 0.5};
      double e0 = (t.b - t.a).cross(p - t.a);
      double e1 = (t.c - t.b).cross(p - t.b);
      double e2 = (t.a - t.c).cross(p - t.c);
      if (!edge_covers(e0, t.a, t.b) || !edge_covers(e1, t.b, t.c) ||
          !edge_covers(e2, t.c, t.a))
        continue;
      // Barycentric weights wrt vertices c, a, b opposite each edge.
      double w_c = e0 / t.area2, w_a = e1 / t.area2, w_b = e2 / t.area2;
      Vec2 uv = t.ua * w_a + t.ub * w_b + t.uc * w_c;
      fn(px, py, uv);
    }
  }
}

template <typename PixelFn>
void rasterize_layer(const LayerRef& layer, int canvas, int y_begin, int y_end,
                     PixelFn&& fn) {
  std::vector<Vec2> uvs = layer_uvs(*layer.mesh, layer.rect);
  for (const auto& tri : layer.mesh->triangles) {
    TriSetup t;
    t.a = (*layer.deformed)[tri[0]];
    t.b = (*layer.deformed)[tri[1]];
    t.c = (*layer.deformed)[tri[2]];
    t.ua = uvs[tri[0]];
    t.ub = uvs[tri[1]];
    t.uc = uvs[tri[2]];
    t.area2 = (t.b - t.a).cross(t.c - t.a);
    if (t.area2 == 0.0) continue;
    if (t.area2 < 0) {  // orient counter-clockwise (y-down winding)
      std::swap(t.b, t.c);
      std::swap(t.ub, t.uc);
      t.area2 = -t.area2;
    }
    rasterize_triangle(t, canvas, y_begin, y_end, fn);
  }
}

void check_rect_in_atlas(const Rect& r, const Image& atlas, const std::string& id) {
  if (r.x < 0 || r.y < 0 || r.x + r.w > atlas.width || r.y + r.h > atlas.height)
    fail_validation("texture_rect of layer '" + id + "' outside atlas bounds");
}

std::array<double, 4> sample_nearest(const Image& atlas, const Rect& rect, const Vec2& uv) {
  int tx = static_cast<int>(std::floor(uv.x));
  int ty = static_cast<int>(std::floor(uv.y));
  tx = std::clamp(tx, rect.x, rect.x + rect.w - 1);
  ty = std::clamp(ty, rect.y, rect.y + rect.h - 1);
  const uint8_t* p = atlas.at(tx, ty);
  return {static_cast<double>(p[0]), static_cast<double>(p[1]),
          static_cast<double>(p[2]), static_cast<double>(p[3])};
}

}  // namespace

Image render(const Rig& rig, const Image& atlas, const ParamVector& params,
             const std::optional<std::set<std::string>>& layer_filter,
             const RenderOptions& opts) {
  DeformedGeometry geo = compose_geometry(rig, params);
  Image canvas(rig.canvas_size, rig.canvas_size);

  std::vector<LayerRef> layers;
  for (const auto& id : rig.z_order) {
    if (layer_filter && !layer_filter->count(id)) continue;
    LayerRef ref = layer_ref(rig, geo, id);
    check_rect_in_atlas(ref.rect, atlas, id);
    layers.push_back(ref);
  }

  // Back-to-front over layers inside each row band: within a layer at most
  // one triangle covers a pixel (top-left rule), so rows are independent.
  parallel_for(static_cast<size_t>(rig.canvas_size), opts.workers,
               [&](size_t row0, size_t row1) {
                 for (const auto& layer : layers) {
                   rasterize_layer(layer, rig.canvas_size, static_cast<int>(row0),
                                   static_cast<int>(row1), [&](int px, int py, const Vec2& uv) {
                                     std::array<double, 4> s =
                                         opts.bilinear ? atlas.sample_bilinear(uv.x, uv.y)
                                                       : sample_nearest(atlas, layer.rect, uv);
                                     over_pixel(canvas.at(px, py), s.data());
                                   });
                 }
               });
  return canvas;
}

BinaryMask render_mask(const Rig& rig, const Image& atlas, const ParamVector& params,
                       const std::set<std::string>& layer_selection,
                       const RenderOptions& opts) {
  if (layer_selection.empty()) fail_validation("render_mask: empty layer selection");
  for (const auto& id : layer_selection)
    if (!rig.is_layer(id)) fail_validation("render_mask: unknown layer '" + id + "'");

  DeformedGeometry geo = compose_geometry(rig, params);
  std::vector<LayerRef> layers;
  for (const auto& id : rig.z_order) {
    if (!layer_selection.count(id)) continue;
    LayerRef ref = layer_ref(rig, geo, id);
    check_rect_in_atlas(ref.rect, atlas, id);
    layers.push_back(ref);
  }

  BinaryMask mask(rig.canvas_size, rig.canvas_size);
  parallel_for(static_cast<size_t>(rig.canvas_size), opts.workers,
               [&](size_t row0, size_t row1) {
                 for (const auto& layer : layers) {
                   rasterize_layer(layer, rig.canvas_size, static_cast<int>(row0),
                                   static_cast<int>(row1), [&](int px, int py, const Vec2& uv) {
                                     std::array<double, 4> s =
                                         sample_nearest(atlas, layer.rect, uv);
                                     if (s[3] > opts.alpha_threshold) mask.set(px, py, true);
                                   });
                 }
               });
  return mask;
}

std::map<std::string, Vec2> displaced_landmarks(const Rig& rig, const ParamVector& params) {
  for (const auto& [id, w] : params.entries) {
    if (!rig.find_component(id))
      fail_validation("params reference unknown component '" + id + "'");
    for (int a = 0; a < 3; ++a)
      if (!(std::abs(w[a]) <= kWeightLimit))
        fail_validation("weight out of range for component " + id);
  }
  std::map<std::string, Vec2> out;
  double canvas = rig.canvas_size;
  for (const auto& [lid, pn] : rig.template_landmarks.points) {
    Vec2 p{pn.x * canvas, pn.y * canvas};
    auto git = rig.template_landmarks.grouping.find(lid);
    if (git != rig.template_landmarks.grouping.end()) {
      if (const Component* c = rig.find_component(git->second)) {
        auto it = params.entries.find(c->id);
        if (it != params.entries.end())
          p += displace_point(*c, p, it->second[0], it->second[1], it->second[2]);
      }
    }
    out[lid] = p;
  }
  return out;
}

Image render_markers(const Rig& rig, const ParamVector& params,
                     const std::vector<std::string>& landmark_subset,
                     const RenderOptions& opts) {
  std::map<std::string, Vec2> pos = displaced_landmarks(rig, params);
  std::vector<Vec2> centers;
  if (landmark_subset.empty()) {
    for (const auto& [id, p] : pos) centers.push_back(p);
  } else {
    for (const auto& id : landmark_subset) {
      auto it = pos.find(id);
      if (it == pos.end()) fail_validation("unknown landmark id '" + id + "'");
      centers.push_back(it->second);
    }
  }

  Image canvas(rig.canvas_size, rig.canvas_size, {0, 0, 0, 255});
  double radius = marker_radius(rig.canvas_size);
  // Coverage rule: a pixel is part of the disc when its center lies within
  // radius + 0.5 (the disc touches the pixel). Keeps blob centroids within
  // tolerance of the true center even at radius 1.
  double r_eff = radius + 0.5;
  double r2 = r_eff * r_eff;
  parallel_for(static_cast<size_t>(rig.canvas_size), opts.workers,
               [&](size_t row0, size_t row1) {
                 for (const auto& c : centers) {
                   int y0 = std::max(static_cast<int>(row0),
                                     static_cast<int>(std::floor(c.y - r_eff - 0.5)));
                   int y1 = std::min(static_cast<int>(row1) - 1,
                                     static_cast<int>(std::ceil(c.y + r_eff)));
                   int x0 = std::max(0, static_cast<int>(std::floor(c.x - r_eff - 0.5)));
                   int x1 = std::min(rig.canvas_size - 1,
                                     static_cast<int>(std::ceil(c.x + r_eff)));
                   for (int py = y0; py <= y1; ++py) {
                     for (int px = x0; px <= x1; ++px) {
                       double dx = px + 0.5 - c.x, dy = py + 0.5 - c.y;
                       if (dx * dx + dy * dy <= r2)
                         canvas.set(px, py, {255, 255, 255, 255});
                     }
                   }
                 }
               });
  return canvas;
}

}  // namespace toonrig
