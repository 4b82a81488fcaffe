#include "toonrig/anim.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "toonrig/error.hpp"
#include "toonrig/raster.hpp"

using nlohmann::json;

namespace toonrig {

const std::vector<std::string>& expression_channel_names() {
  static const std::vector<std::string> names = {
      "browDownLeft", "browDownRight", "browInnerUp", "browOuterUpLeft",
      "browOuterUpRight", "cheekPuff", "cheekSquintLeft", "cheekSquintRight",
      "eyeBlinkLeft", "eyeBlinkRight", "eyeLookDownLeft", "eyeLookDownRight",
      "eyeLookInLeft", "eyeLookInRight", "eyeLookOutLeft", "eyeLookOutRight",
      "eyeLookUpLeft", "eyeLookUpRight", "eyeSquintLeft", "eyeSquintRight",
      "eyeWideLeft", "eyeWideRight", "jawForward", "jawLeft", "jawOpen",
      "jawRight", "mouthClose", "mouthDimpleLeft", "mouthDimpleRight",
      "mouthFrownLeft", "mouthFrownRight", "mouthFunnel", "mouthLeft",
      "mouthLowerDownLeft", "mouthLowerDownRight", "mouthPressLeft",
      "mouthPressRight", "mouthPucker", "mouthRight", "mouthRollLower",
      "mouthRollUpper", "mouthShrugLower", "mouthShrugUpper", "mouthSmileLeft",
      "mouthSmileRight", "mouthStretchLeft", "mouthStretchRight",
      "mouthUpperUpLeft", "mouthUpperUpRight", "noseSneerLeft",
      "noseSneerRight", "tongueOut"};
  return names;
}

bool is_expression_channel(const std::string& name) {
  const auto& names = expression_channel_names();
  return std::binary_search(names.begin(), names.end(), name);
}

ExpressionFrame ExpressionFrame::make(const std::map<std::string, double>& values,
                                      double time) {
  ExpressionFrame f;
  f.time = time;
  for (const auto& [name, v] : values) {
    if (!is_expression_channel(name))
      fail_validation("unknown expression channel '" + name + "'");
    f.channels[name] = std::clamp(v, 0.0, 1.0);
  }
  return f;
}

double ExpressionFrame::value(const std::string& channel) const {
  auto it = channels.find(channel);
  return it == channels.end() ? 0.0 : it->second;
}

namespace {

DeformMode mode_from_name(const std::string& s, const std::string& where) {
  if (s == "translate_x") return DeformMode::translate_x;
  if (s == "translate_y") return DeformMode::translate_y;
  if (s == "scale_x") return DeformMode::scale_x;
  if (s == "scale_y") return DeformMode::scale_y;
  if (s == "uniform_scale") return DeformMode::uniform_scale;
  fail_validation(where + ": unknown mode '" + s + "'");
}

const char* mode_name(DeformMode m) {
  switch (m) {
    case DeformMode::translate_x: return "translate_x";
    case DeformMode::translate_y: return "translate_y";
    case DeformMode::scale_x: return "scale_x";
    case DeformMode::scale_y: return "scale_y";
    default: return "uniform_scale";
  }
}

Pivot pivot_from_name(const std::string& s, const std::string& where) {
  if (s == "anchor") return Pivot::anchor;
  if (s == "top_edge") return Pivot::top_edge;
  if (s == "bottom_edge") return Pivot::bottom_edge;
  fail_validation(where + ": unknown pivot '" + s + "'");
}

const char* pivot_name(Pivot p) {
  switch (p) {
    case Pivot::anchor: return "anchor";
    case Pivot::top_edge: return "top_edge";
    default: return "bottom_edge";
  }
}

}  // namespace

void validate_mapping(const ExpressionMapping& mapping, const Rig& rig) {
  for (size_t i = 0; i < mapping.rules.size(); ++i) {
    const ExpressionRule& r = mapping.rules[i];
    std::string where = "mapping rule " + std::to_string(i);
    if (!is_expression_channel(r.channel))
      fail_validation(where + ": unknown channel '" + r.channel + "'");
    if (!rig.is_layer(r.layer_id))
      fail_validation(where + ": unknown layer '" + r.layer_id + "'");
    if (!std::isfinite(r.gain)) fail_validation(where + ": gain must be finite");
  }
}

DeformedGeometry apply_expression(const Rig& rig, const ParamVector& fitted,
                                  const ExpressionFrame& frame,
                                  const ExpressionMapping& mapping) {
  DeformedGeometry geo = compose_geometry(rig, fitted);

  for (const ExpressionRule& rule : mapping.rules) {
    double v = frame.value(rule.channel);
    if (v == 0.0) continue;  // neutral frames stay bit-identical
    auto it = geo.layer_vertices.find(rule.layer_id);
    if (it == geo.layer_vertices.end())
      fail_validation("mapping rule names unknown layer '" + rule.layer_id + "'");
    std::vector<Vec2>& verts = it->second;

    // Pivot from the identity-deformed layer: the component anchor moves with
    // its translation weights (scale keeps it fixed); static layers pivot
    // about their bounds center.
    Bounds b = Bounds::of(verts);
    Vec2 pivot{(b.min_x + b.max_x) / 2.0, (b.min_y + b.max_y) / 2.0};
    if (const Component* c = rig.find_component(rule.layer_id)) {
      auto pit = fitted.entries.find(c->id);
      pivot = c->anchor;
      if (pit != fitted.entries.end()) {
        pivot.x += (pit->second[0] / kWeightLimit) * c->gains.dx_max;
        pivot.y += (pit->second[1] / kWeightLimit) * c->gains.dy_max;
      }
    }
    if (rule.pivot == Pivot::bottom_edge) pivot.y = b.max_y;
    else if (rule.pivot == Pivot::top_edge) pivot.y = b.min_y;

    double canvas_scale = rig.canvas_size / 1024.0;
    for (Vec2& p : verts) {
      switch (rule.mode) {
        case DeformMode::translate_x:
          p.x += v * rule.gain * canvas_scale;
          break;
        case DeformMode::translate_y:
          p.y += v * rule.gain * canvas_scale;
          break;
        case DeformMode::scale_x:
          p.x += v * rule.gain * (p.x - pivot.x);
          break;
        case DeformMode::scale_y:
          p.y += v * rule.gain * (p.y - pivot.y);
          break;
        case DeformMode::uniform_scale:
          p.x += v * rule.gain * (p.x - pivot.x);
          p.y += v * rule.gain * (p.y - pivot.y);
          break;
      }
    }
  }
  return geo;
}

namespace {

// render() composes geometry itself; to render expression-deformed geometry
// we substitute the deformed vertices as a zero-param rig whose rest meshes
// are the deformed ones.
Rig rig_with_geometry(const Rig& rig, const DeformedGeometry& geo) {
  Rig out = rig;
  for (auto& c : out.components) {
    const std::vector<Vec2>& deformed = geo.layer_vertices.at(c.id);
    // Keep the original UV map: rect <-> *original* mesh bounds. Since UVs are
    // derived from rest bounds, overwrite vertices but preserve triangles.
    c.rest_mesh.vertices = deformed;
  }
  return out;
}

}  // namespace

std::vector<Image> render_timeline(const ModelPackage& pkg,
                                   const std::vector<ExpressionFrame>& frames,
                                   const ExpressionMapping& mapping,
                                   int workers) {
  validate_mapping(mapping, pkg.rig);
  std::vector<Image> out;
  out.reserve(frames.size());
  for (const ExpressionFrame& frame : frames) {
    bool neutral = true;
    for (const auto& [name, v] : frame.channels)
      if (v != 0.0) neutral = false;
    if (neutral) {
      out.push_back(render(pkg.rig, pkg.atlas, pkg.fitted_params, std::nullopt,
                           {.workers = workers}));
      continue;
    }
    DeformedGeometry geo = apply_expression(pkg.rig, pkg.fitted_params, frame, mapping);
    Rig deformed = rig_with_geometry(pkg.rig, geo);
    out.push_back(render(deformed, pkg.atlas, ParamVector::zeros(pkg.rig.component_ids()),
                         std::nullopt, {.workers = workers}));
  }
  return out;
}

ExpressionMapping mapping_from_json_text(const std::string& text,
                                         const std::string& origin,
                                         const Rig* rig_for_validation) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_validation(origin + ": " + e.what());
  }
  ExpressionMapping m;
  try {
    for (const auto& rj : j.at("rules")) {
      ExpressionRule r;
      r.channel = rj.at("channel").get<std::string>();
      r.layer_id = rj.at("layer").get<std::string>();
      std::string where = origin + ": rule for " + r.channel;
      r.mode = mode_from_name(rj.at("mode").get<std::string>(), where);
      r.gain = rj.at("gain").get<double>();
      r.pivot = rj.contains("pivot")
                    ? pivot_from_name(rj.at("pivot").get<std::string>(), where)
                    : Pivot::anchor;
      if (!is_expression_channel(r.channel))
        fail_validation(where + ": unknown channel '" + r.channel + "'");
      m.rules.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    fail_validation(origin + ": " + e.what());
  }
  if (rig_for_validation) validate_mapping(m, *rig_for_validation);
  return m;
}

ExpressionMapping load_mapping(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open mapping file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return mapping_from_json_text(text, path, nullptr);
}

std::vector<ExpressionFrame> load_timeline(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open timeline file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail_validation(path + ": " + e.what());
  }
  std::vector<ExpressionFrame> frames;
  try {
    for (const auto& fj : j) {
      std::map<std::string, double> values;
      if (fj.contains("channels"))
        for (const auto& [name, v] : fj.at("channels").items())
          values[name] = v.get<double>();
      frames.push_back(ExpressionFrame::make(values, fj.value("time", 0.0)));
    }
  } catch (const json::exception& e) {
    fail_validation(path + ": " + e.what());
  }
  for (size_t i = 1; i < frames.size(); ++i)
    if (frames[i].time < frames[i - 1].time)
      fail_validation(path + ": frames must be time-sorted");
  return frames;
}

void save_timeline(const std::vector<ExpressionFrame>& frames, const std::string& path) {
  json j = json::array();
  for (const auto& f : frames) {
    json channels = json::object();
    for (const auto& [name, v] : f.channels) channels[name] = v;
    j.push_back({{"time", f.time}, {"channels", channels}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_runtime("cannot write timeline file " + path);
  out << j.dump(2) << "\n";
}

// Referenced by tests that round-trip mapping files.
std::string mapping_to_json_text(const ExpressionMapping& m) {
  json rules = json::array();
  for (const auto& r : m.rules)
    rules.push_back({{"channel", r.channel},
                     {"layer", r.layer_id},
                     {"mode", mode_name(r.mode)},
                     {"gain", r.gain},
                     {"pivot", pivot_name(r.pivot)}});
  return json{{"rules", rules}}.dump(2) + "\n";
}

}  // namespace toonrig
