#include "toonrig/assets.hpp"

#include <cmath>

#include "toonrig/error.hpp"
#include "toonrig/raster.hpp"

namespace toonrig {

namespace {

constexpr int kCanvas = 1024;
constexpr double kPi = 3.14159265358979323846;

Mesh quad(double x0, double y0, double x1, double y1) {
  Mesh m;
  m.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

void add_landmark(Rig& rig, const std::string& id, const std::string& group,
                  double x, double y) {
  rig.template_landmarks.points[id] = {x / kCanvas, y / kCanvas};
  rig.template_landmarks.grouping[id] = group;
}

Component make_component(const std::string& id, double cx, double cy,
                         double half_w, double half_h, const Rect& rect) {
  Component c;
  c.id = id;
  c.rest_mesh = quad(cx - half_w, cy - half_h, cx + half_w, cy + half_h);
  c.anchor = {cx, cy};
  // Default gains: translations span 2% of canvas at full weight, scale spans
  // +-30% size change.
  c.gains = {0.02 * kCanvas, 0.02 * kCanvas, 0.30};
  c.texture_rect = rect;
  return c;
}

// --- procedural art helpers (atlas-rect local coordinates) -----------------

void fill_ellipse(Image& img, const Rect& rect, double cx, double cy, double rx,
                  double ry, std::array<uint8_t, 4> color) {
  for (int y = 0; y < rect.h; ++y) {
    for (int x = 0; x < rect.w; ++x) {
      double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) img.set(rect.x + x, rect.y + y, color);
    }
  }
}

void fill_ring(Image& img, const Rect& rect, double cx, double cy, double rx,
               double ry, double thickness, std::array<uint8_t, 4> color) {
  // Inward ring: between the ellipse and a concentric one `thickness` smaller.
  for (int y = 0; y < rect.h; ++y) {
    for (int x = 0; x < rect.w; ++x) {
      double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      double outer = (dx / rx) * (dx / rx) + (dy / ry) * (dy / ry);
      double irx = rx - thickness, iry = ry - thickness;
      double inner = (dx / irx) * (dx / irx) + (dy / iry) * (dy / iry);
      if (outer <= 1.0 && inner > 1.0) img.set(rect.x + x, rect.y + y, color);
    }
  }
}

void fill_disc(Image& img, const Rect& rect, double cx, double cy, double r,
               std::array<uint8_t, 4> color) {
  fill_ellipse(img, rect, cx, cy, r, r, color);
}

void stroke_polyline(Image& img, const Rect& rect, const std::vector<Vec2>& pts,
                     double radius, std::array<uint8_t, 4> color) {
  for (int y = 0; y < rect.h; ++y) {
    for (int x = 0; x < rect.w; ++x) {
      Vec2 p{x + 0.5, y + 0.5};
      double d = 1e30;
      for (size_t i = 0; i + 1 < pts.size(); ++i) {
        Vec2 a = pts[i], b = pts[i + 1];
        Vec2 ab = b - a;
        double t = ab.squared_norm() > 0
                       ? std::clamp((p - a).dot(ab) / ab.squared_norm(), 0.0, 1.0)
                       : 0.0;
        d = std::min(d, (p - (a + ab * t)).norm());
      }
      if (d <= radius) img.set(rect.x + x, rect.y + y, color);
    }
  }
}

void paint_eye(Image& atlas, const Rect& rect) {
  double cx = rect.w / 2.0, cy = rect.h / 2.0;
  fill_ellipse(atlas, rect, cx, cy, 60, 30, {250, 250, 252, 255});     // sclera
  fill_disc(atlas, rect, cx, cy, 20, DefaultColors::iris);             // iris
  fill_disc(atlas, rect, cx, cy, 8, {18, 18, 24, 255});                // pupil
  fill_disc(atlas, rect, cx + 7, cy - 7, 3.5, {255, 255, 255, 255});   // highlight
  fill_ring(atlas, rect, cx, cy, 60, 30, 3, {40, 32, 32, 255});        // lash line
}

void paint_eyebrow(Image& atlas, const Rect& rect, const std::vector<Vec2>& arc) {
  stroke_polyline(atlas, rect, arc, 7, {70, 48, 36, 255});
}

void paint_nose(Image& atlas, const Rect& rect) {
  // Rect-local geometry mirrors the nose landmarks (rect covers 452..572 x
  // 520..660 on the canvas).
  stroke_polyline(atlas, rect, {{60, 28}, {60, 112}}, 3, {196, 152, 128, 255});
  fill_disc(atlas, rect, 60, 116, 8, {205, 160, 140, 255});   // tip
  fill_disc(atlas, rect, 34, 100, 6, {140, 95, 80, 255});     // nostrils
  fill_disc(atlas, rect, 86, 100, 6, {140, 95, 80, 255});
}

void paint_mouth(Image& atlas, const Rect& rect) {
  double cx = rect.w / 2.0, cy = rect.h / 2.0;
  fill_ellipse(atlas, rect, cx, cy, 100, 42, {198, 92, 92, 255});      // lips
  fill_ellipse(atlas, rect, cx, cy, 88, 7, {120, 42, 42, 255});        // lip line
  fill_ring(atlas, rect, cx, cy, 100, 42, 3, {120, 50, 50, 255});
}

void paint_base_face(Image& atlas, const Rect& rect) {
  // Face ellipse center (512, 540) r (330, 410); rect origin (162, 110).
  double cx = 512 - 162, cy = 540 - 110;
  fill_ellipse(atlas, rect, cx, cy, 330, 410, DefaultColors::skin);
  fill_ring(atlas, rect, cx, cy, 330, 410, 4, {150, 110, 90, 255});
  // Ears: small bumps peeking past the contour (within the crop margin).
  fill_ellipse(atlas, rect, cx - 318, cy - 20, 20, 36, DefaultColors::skin);
  fill_ellipse(atlas, rect, cx + 318, cy - 20, 20, 36, DefaultColors::skin);
}

}  // namespace

Rig make_default_rig() {
  Rig rig;
  rig.canvas_size = kCanvas;

  // Atlas layout (2048 x 1024).
  const Rect base_rect{0, 0, 700, 860};
  const Rect hair_rect{704, 0, 1024, 1024};
  const Rect l_eye_rect{1732, 0, 200, 120};
  const Rect r_eye_rect{1732, 124, 200, 120};
  const Rect l_brow_rect{1732, 248, 220, 70};
  const Rect r_brow_rect{1732, 322, 220, 70};
  const Rect nose_rect{1732, 396, 120, 140};
  const Rect mouth_rect{1732, 540, 260, 150};

  rig.base_face.id = "base_face";
  rig.base_face.rest_mesh = quad(162, 110, 862, 970);
  rig.base_face.texture_rect = base_rect;

  StaticLayer hair;
  hair.id = "hair";
  hair.rest_mesh = quad(0, 0, kCanvas, kCanvas);
  hair.texture_rect = hair_rect;
  rig.hair = hair;

  struct EyeSpec {
    const char* id;
    double cx;
    Rect rect;
  };
  for (const EyeSpec& e : {EyeSpec{"left_eye", 362, l_eye_rect},
                           EyeSpec{"right_eye", 662, r_eye_rect}}) {
    Component c = make_component(e.id, e.cx, 480, 100, 60, e.rect);
    for (int k = 0; k < 10; ++k) {
      double ang = 2.0 * kPi * k / 10.0;
      std::string lid = std::string(e.id) + "_" + std::to_string(k);
      add_landmark(rig, lid, e.id, e.cx + 60 * std::cos(ang), 480 + 30 * std::sin(ang));
      c.landmark_ids.push_back(lid);
    }
    rig.components.push_back(std::move(c));
  }

  struct BrowSpec {
    const char* id;
    double cx;
    Rect rect;
  };
  for (const BrowSpec& b : {BrowSpec{"left_eyebrow", 362, l_brow_rect},
                            BrowSpec{"right_eyebrow", 662, r_brow_rect}}) {
    Component c = make_component(b.id, b.cx, 376, 110, 35, b.rect);
    const double dyofs[5] = {0, -12, -18, -12, 0};
    for (int k = 0; k < 5; ++k) {
      double x = b.cx - 90 + 45 * k;
      std::string lid = std::string(b.id) + "_" + std::to_string(k);
      add_landmark(rig, lid, b.id, x, 380 + dyofs[k]);
      c.landmark_ids.push_back(lid);
    }
    rig.components.push_back(std::move(c));
  }

  {
    Component c = make_component("nose", 512, 590, 60, 70, nose_rect);
    const double pts[5][2] = {{512, 548}, {482, 620}, {542, 620}, {512, 640}, {512, 592}};
    for (int k = 0; k < 5; ++k) {
      std::string lid = "nose_" + std::to_string(k);
      add_landmark(rig, lid, "nose", pts[k][0], pts[k][1]);
      c.landmark_ids.push_back(lid);
    }
    rig.components.push_back(std::move(c));
  }

  {
    Component c = make_component("mouth", 512, 770, 130, 75, mouth_rect);
    for (int k = 0; k < 8; ++k) {
      double ang = 2.0 * kPi * k / 8.0;
      std::string lid = "mouth_" + std::to_string(k);
      add_landmark(rig, lid, "mouth", 512 + 110 * std::cos(ang), 770 + 50 * std::sin(ang));
      c.landmark_ids.push_back(lid);
    }
    rig.components.push_back(std::move(c));
  }

  // Contour ring on the face ellipse (16 points).
  for (int k = 0; k < 16; ++k) {
    double ang = 2.0 * kPi * k / 16.0;
    add_landmark(rig, "contour_" + std::string(k < 10 ? "0" : "") + std::to_string(k),
                 "contour", 512 + 330 * std::cos(ang), 540 + 410 * std::sin(ang));
  }

  rig.z_order = {"base_face", "left_eyebrow", "right_eyebrow", "left_eye",
                 "right_eye",  "nose",         "mouth",         "hair"};
  validate_rig(rig);
  return rig;
}

Image make_default_atlas(const Rig& rig) {
  Image atlas(2048, 1024);
  paint_base_face(atlas, rig.base_face.texture_rect);
  for (const auto& c : rig.components) {
    if (c.id == "left_eye" || c.id == "right_eye") {
      paint_eye(atlas, c.texture_rect);
    } else if (c.id == "left_eyebrow" || c.id == "right_eyebrow") {
      // Arc in rect coordinates: rect covers (cx-110, 341)..(cx+110, 411).
      std::vector<Vec2> arc;
      const double dyofs[5] = {0, -12, -18, -12, 0};
      for (int k = 0; k < 5; ++k) arc.push_back({20.0 + 45 * k, 380 + dyofs[k] - 341.0});
      paint_eyebrow(atlas, c.texture_rect, arc);
    } else if (c.id == "nose") {
      paint_nose(atlas, c.texture_rect);
    } else if (c.id == "mouth") {
      paint_mouth(atlas, c.texture_rect);
    }
  }
  // Hair rect stays transparent until integration.
  return atlas;
}

ExpressionMapping make_default_mapping() {
  return mapping_from_json_text(default_mapping_json(), "<default mapping>");
}

std::string default_mapping_json() {
  return R"({
  "rules": [
    {"channel": "eyeBlinkLeft",   "layer": "left_eye",      "mode": "scale_y",     "gain": -1.0,  "pivot": "top_edge"},
    {"channel": "eyeBlinkRight",  "layer": "right_eye",     "mode": "scale_y",     "gain": -1.0,  "pivot": "top_edge"},
    {"channel": "eyeWideLeft",    "layer": "left_eye",      "mode": "scale_y",     "gain": 0.35,  "pivot": "anchor"},
    {"channel": "eyeWideRight",   "layer": "right_eye",     "mode": "scale_y",     "gain": 0.35,  "pivot": "anchor"},
    {"channel": "jawOpen",        "layer": "mouth",         "mode": "scale_y",     "gain": 0.9,   "pivot": "top_edge"},
    {"channel": "mouthSmileLeft", "layer": "mouth",         "mode": "translate_y", "gain": -6.0},
    {"channel": "mouthSmileRight","layer": "mouth",         "mode": "translate_y", "gain": -6.0},
    {"channel": "mouthSmileLeft", "layer": "mouth",         "mode": "scale_x",     "gain": 0.12,  "pivot": "anchor"},
    {"channel": "mouthSmileRight","layer": "mouth",         "mode": "scale_x",     "gain": 0.12,  "pivot": "anchor"},
    {"channel": "mouthFrownLeft", "layer": "mouth",         "mode": "translate_y", "gain": 6.0},
    {"channel": "mouthFrownRight","layer": "mouth",         "mode": "translate_y", "gain": 6.0},
    {"channel": "mouthPucker",    "layer": "mouth",         "mode": "scale_x",     "gain": -0.35, "pivot": "anchor"},
    {"channel": "browInnerUp",    "layer": "left_eyebrow",  "mode": "translate_y", "gain": -14.0},
    {"channel": "browInnerUp",    "layer": "right_eyebrow", "mode": "translate_y", "gain": -14.0},
    {"channel": "browDownLeft",   "layer": "left_eyebrow",  "mode": "translate_y", "gain": 10.0},
    {"channel": "browDownRight",  "layer": "right_eyebrow", "mode": "translate_y", "gain": 10.0}
  ]
}
)";
}

std::string default_timeline_json() {
  return R"([
  {"time": 0.00, "channels": {}},
  {"time": 0.05, "channels": {"eyeBlinkLeft": 0.25, "eyeBlinkRight": 0.25}},
  {"time": 0.10, "channels": {"eyeBlinkLeft": 0.50, "eyeBlinkRight": 0.50}},
  {"time": 0.15, "channels": {"eyeBlinkLeft": 0.75, "eyeBlinkRight": 0.75}},
  {"time": 0.20, "channels": {"eyeBlinkLeft": 1.00, "eyeBlinkRight": 1.00}},
  {"time": 0.25, "channels": {"eyeBlinkLeft": 0.50, "eyeBlinkRight": 0.50}},
  {"time": 0.30, "channels": {}},
  {"time": 0.35, "channels": {"mouthSmileLeft": 0.8, "mouthSmileRight": 0.8, "browInnerUp": 0.6}},
  {"time": 0.40, "channels": {"jawOpen": 0.7}}
]
)";
}

Fixture make_fixture(const Rig& rig, const Image& atlas, const ParamVector& params) {
  Fixture fx;
  fx.portrait = render(rig, atlas, params);
  std::map<std::string, Vec2> pos = displaced_landmarks(rig, params);
  for (const auto& [id, p] : pos) {
    fx.landmarks.points[id] = p * (1.0 / rig.canvas_size);
    auto git = rig.template_landmarks.grouping.find(id);
    fx.landmarks.grouping[id] = git != rig.template_landmarks.grouping.end()
                                    ? git->second
                                    : "";
  }
  return fx;
}

}  // namespace toonrig
