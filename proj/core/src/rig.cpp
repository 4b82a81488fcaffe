#include "toonrig/rig.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "toonrig/error.hpp"
#include "toonrig/hash.hpp"

using nlohmann::json;

namespace toonrig {

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    default: return "scale";
  }
}

Axis axis_from_name(const std::string& name) {
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  if (name == "scale") return Axis::scale;
  fail_validation("unknown axis '" + name + "'");
}

double ParamVector::get(const std::string& component, Axis axis) const {
  auto it = entries.find(component);
  if (it == entries.end())
    fail_validation("ParamVector has no entries for component '" + component + "'");
  return it->second[static_cast<int>(axis)];
}

void ParamVector::set(const std::string& component, Axis axis, double w) {
  entries[component][static_cast<int>(axis)] = w;
}

ParamVector ParamVector::zeros(const std::vector<std::string>& component_ids) {
  ParamVector p;
  for (const auto& id : component_ids) p.entries[id] = {0.0, 0.0, 0.0};
  return p;
}

std::vector<std::string> LandmarkSet::ids_in_group(const std::string& group) const {
  std::vector<std::string> out;
  for (const auto& [id, g] : grouping)
    if (g == group) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

Vec2 LandmarkSet::group_centroid(const std::string& group) const {
  Vec2 sum;
  size_t n = 0;
  for (const auto& [id, g] : grouping) {
    if (g != group) continue;
    auto it = points.find(id);
    if (it == points.end()) continue;
    sum += it->second;
    ++n;
  }
  if (n == 0) fail_validation("landmark group '" + group + "' is empty");
  return sum * (1.0 / static_cast<double>(n));
}

const Component* Rig::find_component(const std::string& id) const {
  for (const auto& c : components)
    if (c.id == id) return &c;
  return nullptr;
}

std::vector<std::string> Rig::component_ids() const {
  std::vector<std::string> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.id);
  return out;
}

bool Rig::is_layer(const std::string& id) const {
  if (id == base_face.id) return true;
  if (hair && id == hair->id) return true;
  return find_component(id) != nullptr;
}

std::vector<std::string> Rig::landmark_schema() const {
  std::vector<std::string> out;
  for (const auto& c : components)
    for (const auto& lid : c.landmark_ids) out.push_back(lid);
  // Contour ids in rig-file order: collect those not claimed by a component.
  std::set<std::string> claimed(out.begin(), out.end());
  std::vector<std::string> contour;
  for (const auto& [id, g] : template_landmarks.grouping)
    if (g == "contour" && !claimed.count(id)) contour.push_back(id);
  std::sort(contour.begin(), contour.end());
  out.insert(out.end(), contour.begin(), contour.end());
  return out;
}

Rig Rig::scaled_to(int new_canvas) const {
  if (new_canvas <= 0) fail_validation("canvas size must be positive");
  double s = static_cast<double>(new_canvas) / canvas_size;
  Rig out = *this;
  out.canvas_size = new_canvas;
  auto scale_mesh = [s](Mesh& m) {
    for (auto& v : m.vertices) v = v * s;
  };
  for (auto& c : out.components) {
    scale_mesh(c.rest_mesh);
    c.anchor = c.anchor * s;
    c.gains.dx_max *= s;
    c.gains.dy_max *= s;
    // s_max is unitless.
  }
  scale_mesh(out.base_face.rest_mesh);
  if (out.hair) scale_mesh(out.hair->rest_mesh);
  // template_landmarks are normalized; unchanged.
  return out;
}

uint64_t Rig::fingerprint() const { return fnv1a64(rig_to_json_text(*this)); }

Vec2 displace_point(const Component& c, const Vec2& rest_point,
                    double wx, double wy, double ws) {
  Vec2 d{(wx / kWeightLimit) * c.gains.dx_max,
         (wy / kWeightLimit) * c.gains.dy_max};
  double k = (ws / kWeightLimit) * c.gains.s_max;
  d.x += k * (rest_point.x - c.anchor.x);
  d.y += k * (rest_point.y - c.anchor.y);
  return d;
}

DeformedGeometry compose_geometry(const Rig& rig, const ParamVector& params) {
  for (const auto& [id, w] : params.entries) {
    if (!rig.find_component(id))
      fail_validation("params reference unknown component '" + id + "'");
    for (int a = 0; a < 3; ++a)
      if (!(std::abs(w[a]) <= kWeightLimit))
        fail_validation("weight out of range for " + id + "." +
                        axis_name(static_cast<Axis>(a)) + ": " + std::to_string(w[a]));
  }
  DeformedGeometry geo;
  for (const auto& c : rig.components) {
    auto it = params.entries.find(c.id);
    double wx = 0, wy = 0, ws = 0;
    if (it != params.entries.end()) {
      wx = it->second[0];
      wy = it->second[1];
      ws = it->second[2];
    }
    std::vector<Vec2> verts = c.rest_mesh.vertices;
    if (wx != 0.0 || wy != 0.0 || ws != 0.0) {
      for (auto& v : verts) v += displace_point(c, v, wx, wy, ws);
    }
    geo.layer_vertices[c.id] = std::move(verts);
  }
  geo.layer_vertices[rig.base_face.id] = rig.base_face.rest_mesh.vertices;
  if (rig.hair) geo.layer_vertices[rig.hair->id] = rig.hair->rest_mesh.vertices;
  return geo;
}

std::vector<ParamViolation> validate_params(const ParamVector& params, const Rig& rig) {
  std::vector<ParamViolation> out;
  for (const auto& c : rig.components) {
    auto it = params.entries.find(c.id);
    if (it == params.entries.end()) {
      for (Axis a : kAxes)
        out.push_back({c.id, axis_name(a), "missing entry " + c.id + "." + axis_name(a)});
      continue;
    }
    for (Axis a : kAxes) {
      double w = it->second[static_cast<int>(a)];
      if (!(std::abs(w) <= kWeightLimit)) {
        std::ostringstream msg;
        msg << c.id << "." << axis_name(a) << " = " << w << " outside [-"
            << kWeightLimit << ", " << kWeightLimit << "]";
        out.push_back({c.id, axis_name(a), msg.str()});
      }
    }
  }
  for (const auto& [id, w] : params.entries) {
    if (!rig.find_component(id))
      out.push_back({id, "", "entry for unknown component '" + id + "'"});
  }
  return out;
}

// --- JSON serialization ---------------------------------------------------

namespace {

json mesh_to_json(const Mesh& m) {
  json verts = json::array();
  for (const auto& v : m.vertices) verts.push_back({v.x, v.y});
  json tris = json::array();
  for (const auto& t : m.triangles) tris.push_back({t[0], t[1], t[2]});
  return json{{"vertices", verts}, {"triangles", tris}};
}

Mesh mesh_from_json(const json& j, const std::string& where) {
  Mesh m;
  if (!j.contains("vertices") || !j.contains("triangles"))
    fail_validation(where + ": mesh needs 'vertices' and 'triangles'");
  for (const auto& v : j.at("vertices"))
    m.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  for (const auto& t : j.at("triangles"))
    m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  return m;
}

json rect_to_json(const Rect& r) { return json{r.x, r.y, r.w, r.h}; }

Rect rect_from_json(const json& j) {
  return Rect{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

json landmarks_to_json(const LandmarkSet& ls, double scale) {
  json points = json::object();
  for (const auto& [id, p] : ls.points) points[id] = {p.x * scale, p.y * scale};
  json groups = json::object();
  std::map<std::string, std::vector<std::string>> by_group;
  for (const auto& [id, g] : ls.grouping) by_group[g].push_back(id);
  for (auto& [g, ids] : by_group) {
    std::sort(ids.begin(), ids.end());
    groups[g] = ids;
  }
  return json{{"points", points}, {"groups", groups}};
}

LandmarkSet landmarks_from_json(const json& j, double scale, const std::string& where) {
  LandmarkSet ls;
  if (!j.contains("points")) fail_validation(where + ": missing 'points'");
  for (const auto& [id, p] : j.at("points").items())
    ls.points[id] = {p.at(0).get<double>() / scale, p.at(1).get<double>() / scale};
  if (j.contains("groups")) {
    for (const auto& [g, ids] : j.at("groups").items())
      for (const auto& id : ids) {
        std::string lid = id.get<std::string>();
        if (!ls.points.count(lid))
          fail_validation(where + ": group '" + g + "' names unknown landmark '" + lid + "'");
        ls.grouping[lid] = g;
      }
  }
  return ls;
}

Vec2 centroid_of(const std::vector<Vec2>& pts) {
  Vec2 sum;
  for (const auto& p : pts) sum += p;
  return sum * (1.0 / static_cast<double>(pts.size()));
}

void validate_mesh(const Mesh& m, const std::string& where) {
  if (m.vertices.size() < 3)
    fail_validation(where + ": mesh needs >= 3 vertices, has " +
                    std::to_string(m.vertices.size()));
  if (m.triangles.empty()) fail_validation(where + ": mesh has no triangles");
  for (const auto& t : m.triangles)
    for (int idx : t)
      if (idx < 0 || idx >= static_cast<int>(m.vertices.size()))
        fail_validation(where + ": triangle index " + std::to_string(idx) + " out of range");
}

}  // namespace

std::string rig_to_json_text(const Rig& rig) {
  json j;
  j["canvas_size"] = rig.canvas_size;
  json comps = json::array();
  for (const auto& c : rig.components) {
    json cj = mesh_to_json(c.rest_mesh);
    cj["id"] = c.id;
    cj["anchor"] = {c.anchor.x, c.anchor.y};
    cj["gains"] = {{"dx_max", c.gains.dx_max}, {"dy_max", c.gains.dy_max}, {"s_max", c.gains.s_max}};
    cj["texture_rect"] = rect_to_json(c.texture_rect);
    cj["landmark_ids"] = c.landmark_ids;
    comps.push_back(cj);
  }
  j["components"] = comps;
  json base = mesh_to_json(rig.base_face.rest_mesh);
  base["texture_rect"] = rect_to_json(rig.base_face.texture_rect);
  j["base_face"] = base;
  if (rig.hair) {
    json hair = mesh_to_json(rig.hair->rest_mesh);
    hair["texture_rect"] = rect_to_json(rig.hair->texture_rect);
    j["hair"] = hair;
  }
  j["template_landmarks"] = landmarks_to_json(rig.template_landmarks, rig.canvas_size);
  j["z_order"] = rig.z_order;
  return j.dump(2) + "\n";
}

Rig rig_from_json_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_validation(origin + ": JSON parse error: " + e.what());
  }
  try {
    Rig rig;
    rig.canvas_size = j.at("canvas_size").get<int>();
    if (rig.canvas_size <= 0) fail_validation(origin + ": canvas_size must be positive");
    for (const auto& cj : j.at("components")) {
      Component c;
      c.id = cj.at("id").get<std::string>();
      c.rest_mesh = mesh_from_json(cj, origin + ": component " + c.id);
      if (cj.contains("anchor"))
        c.anchor = {cj.at("anchor").at(0).get<double>(), cj.at("anchor").at(1).get<double>()};
      else
        c.anchor = centroid_of(c.rest_mesh.vertices);
      const auto& g = cj.at("gains");
      c.gains = {g.at("dx_max").get<double>(), g.at("dy_max").get<double>(),
                 g.at("s_max").get<double>()};
      c.texture_rect = rect_from_json(cj.at("texture_rect"));
      for (const auto& lid : cj.at("landmark_ids"))
        c.landmark_ids.push_back(lid.get<std::string>());
      rig.components.push_back(std::move(c));
    }
    rig.base_face.id = "base_face";
    rig.base_face.rest_mesh = mesh_from_json(j.at("base_face"), origin + ": base_face");
    rig.base_face.texture_rect = rect_from_json(j.at("base_face").at("texture_rect"));
    if (j.contains("hair")) {
      StaticLayer hair;
      hair.id = "hair";
      hair.rest_mesh = mesh_from_json(j.at("hair"), origin + ": hair");
      hair.texture_rect = rect_from_json(j.at("hair").at("texture_rect"));
      rig.hair = std::move(hair);
    }
    rig.template_landmarks = landmarks_from_json(j.at("template_landmarks"),
                                                 rig.canvas_size, origin + ": template_landmarks");
    for (const auto& id : j.at("z_order")) rig.z_order.push_back(id.get<std::string>());
    validate_rig(rig);
    return rig;
  } catch (const json::exception& e) {
    fail_validation(origin + ": " + e.what());
  }
}

void validate_rig(const Rig& rig) {
  std::set<std::string> ids;
  for (const auto& c : rig.components) {
    if (!ids.insert(c.id).second)
      fail_validation("duplicate component id '" + c.id + "'");
    validate_mesh(c.rest_mesh, "component " + c.id);
    if (!(c.gains.dx_max > 0 && c.gains.dy_max > 0 && c.gains.s_max > 0))
      fail_validation("component " + c.id + ": gains must be strictly positive");
    for (const auto& lid : c.landmark_ids) {
      if (!rig.template_landmarks.points.count(lid))
        fail_validation("component " + c.id + ": landmark '" + lid +
                        "' missing from template_landmarks");
    }
  }
  validate_mesh(rig.base_face.rest_mesh, "base_face");
  if (rig.hair) validate_mesh(rig.hair->rest_mesh, "hair");

  for (const auto& [id, p] : rig.template_landmarks.points) {
    if (!(p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1))
      fail_validation("template landmark '" + id + "' outside [0,1]^2");
    if (!rig.template_landmarks.grouping.count(id))
      fail_validation("template landmark '" + id + "' has no group");
  }

  // z_order must be a permutation of all layer ids with base_face behind all
  // feature layers.
  std::set<std::string> layers{rig.base_face.id};
  if (rig.hair) layers.insert(rig.hair->id);
  for (const auto& c : rig.components) layers.insert(c.id);
  std::set<std::string> z(rig.z_order.begin(), rig.z_order.end());
  if (z != layers || z.size() != rig.z_order.size())
    fail_validation("z_order must be a permutation of all layer ids");
  size_t base_pos = 0, first_feature = rig.z_order.size();
  for (size_t i = 0; i < rig.z_order.size(); ++i) {
    if (rig.z_order[i] == rig.base_face.id) base_pos = i;
    else if (rig.find_component(rig.z_order[i]) && i < first_feature) first_feature = i;
  }
  if (base_pos > first_feature)
    fail_validation("base_face must be behind all feature layers in z_order");
}

Rig load_rig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open rig file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return rig_from_json_text(ss.str(), path);
}

void save_rig(const Rig& rig, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_runtime("cannot write rig file " + path);
  out << rig_to_json_text(rig);
}

ParamVector load_params_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open params file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail_validation(path + ": " + e.what());
  }
  ParamVector p;
  for (const auto& [id, axes] : j.items()) {
    p.entries[id] = {axes.at("x").get<double>(), axes.at("y").get<double>(),
                     axes.at("scale").get<double>()};
  }
  return p;
}

void save_params_json(const ParamVector& params, const std::string& path) {
  json j = json::object();
  for (const auto& [id, w] : params.entries)
    j[id] = {{"x", w[0]}, {"y", w[1]}, {"scale", w[2]}};
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_runtime("cannot write params file " + path);
  out << j.dump(2) << "\n";
}

// --- geometry helpers (declared in geometry.hpp) ---------------------------

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double distance_to_hull(const std::vector<Vec2>& hull, const Vec2& p) {
  size_t n = hull.size();
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n == 1) return (p - hull[0]).norm();
  bool inside = n >= 3;
  double min_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % n];
    Vec2 ab = b - a;
    double len2 = ab.squared_norm();
    double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    min_d = std::min(min_d, (p - (a + ab * t)).norm());
    if (ab.cross(p - a) < 0) inside = false;
  }
  return inside ? -min_d : min_d;
}

}  // namespace toonrig
