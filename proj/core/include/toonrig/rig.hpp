#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toonrig/geometry.hpp"

namespace toonrig {

enum class Axis { x, y, scale };
constexpr std::array<Axis, 3> kAxes = {Axis::x, Axis::y, Axis::scale};
const char* axis_name(Axis a);
Axis axis_from_name(const std::string& name);

constexpr double kWeightLimit = 30.0;

/// Blendshape weight vector: one (x, y, scale) triple per rig component,
/// each weight in [-30, 30].
struct ParamVector {
  std::map<std::string, std::array<double, 3>> entries;  // component -> x,y,scale

  double get(const std::string& component, Axis axis) const;
  void set(const std::string& component, Axis axis, double w);
  static ParamVector zeros(const std::vector<std::string>& component_ids);
};

struct Gains {
  double dx_max = 0.0;  // px at weight +30
  double dy_max = 0.0;  // px at weight +30
  double s_max = 0.0;   // fractional size change at weight +30
};

struct Mesh {
  std::vector<Vec2> vertices;                 // canvas px
  std::vector<std::array<int, 3>> triangles;  // indices into vertices
};

struct Component {
  std::string id;
  Mesh rest_mesh;
  Vec2 anchor;  // deformation center; defaults to the rest-mesh vertex centroid
  Gains gains;
  Rect texture_rect;  // atlas px
  std::vector<std::string> landmark_ids;
};

/// A static (non-blendshape) layer: the base face, and optionally hair.
struct StaticLayer {
  std::string id;
  Mesh rest_mesh;
  Rect texture_rect;
};

/// Named 2D keypoints in [0,1]^2 (normalized by canvas or image size), each
/// assigned to a component id or to "contour".
struct LandmarkSet {
  std::map<std::string, Vec2> points;
  std::map<std::string, std::string> grouping;  // landmark id -> group

  std::vector<std::string> ids_in_group(const std::string& group) const;
  Vec2 group_centroid(const std::string& group) const;
};

struct Rig {
  int canvas_size = 1024;  // square canvas
  std::vector<Component> components;
  StaticLayer base_face;
  std::optional<StaticLayer> hair;
  LandmarkSet template_landmarks;  // normalized by canvas_size
  std::vector<std::string> z_order;  // back to front, all layer ids

  const Component* find_component(const std::string& id) const;
  std::vector<std::string> component_ids() const;
  bool is_layer(const std::string& id) const;

  /// Landmark schema order: components in rig order (their landmark_ids in
  /// listed order), then the contour group. This is the regressor's input
  /// ordering and the dataset record layout.
  std::vector<std::string> landmark_schema() const;

  /// Same geometry at a different canvas size: vertex coords, anchors and
  /// translation gains scale; atlas rects do not (texture lookup goes through
  /// the rect<->mesh-bounds map, so one atlas serves all sizes).
  Rig scaled_to(int new_canvas) const;

  /// FNV-1a 64 over the canonical JSON serialization.
  uint64_t fingerprint() const;
};

/// Per-layer deformed vertex positions, same counts as the rest meshes.
struct DeformedGeometry {
  std::map<std::string, std::vector<Vec2>> layer_vertices;
};

/// Displacement of a rest-space point attached to `c` under weights (wx, wy, ws):
///   (wx/30)*dx_max*(1,0) + (wy/30)*dy_max*(0,1) + (ws/30)*s_max*(p - anchor)
Vec2 displace_point(const Component& c, const Vec2& rest_point,
                    double wx, double wy, double ws);

/// Linear blendshape composition. Base face (and hair) vertices pass through
/// unchanged. Throws on unknown components or out-of-range weights.
DeformedGeometry compose_geometry(const Rig& rig, const ParamVector& params);

struct ParamViolation {
  std::string component;
  std::string axis;  // empty for missing/extra component entries
  std::string message;
};

/// Non-throwing validity report: out-of-range weights, missing and unknown
/// component entries.
std::vector<ParamViolation> validate_params(const ParamVector& params, const Rig& rig);

// Rig file IO (UTF-8 JSON; schema documented in the README).
Rig load_rig(const std::string& path);
void save_rig(const Rig& rig, const std::string& path);
Rig rig_from_json_text(const std::string& text, const std::string& origin);
std::string rig_to_json_text(const Rig& rig);

/// Structural invariant check; throws Error(validation) naming the field.
void validate_rig(const Rig& rig);

// params.json IO (component -> {x, y, scale}).
ParamVector load_params_json(const std::string& path);
void save_params_json(const ParamVector& params, const std::string& path);

}  // namespace toonrig
