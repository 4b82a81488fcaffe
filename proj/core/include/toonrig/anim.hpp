#pragma once

#include <map>
#include <string>
#include <vector>

#include "toonrig/assembly.hpp"
#include "toonrig/rig.hpp"

namespace toonrig {

/// The 52 standard expression channel names.
const std::vector<std::string>& expression_channel_names();
bool is_expression_channel(const std::string& name);

/// One animation frame: channel values in [0,1] (inputs are clamped; unknown
/// names are rejected at construction/load).
struct ExpressionFrame {
  std::map<std::string, double> channels;
  double time = 0.0;

  static ExpressionFrame make(const std::map<std::string, double>& values, double time);
  double value(const std::string& channel) const;  // 0 when unset
};

enum class DeformMode { translate_x, translate_y, scale_x, scale_y, uniform_scale };
enum class Pivot { anchor, top_edge, bottom_edge };

struct ExpressionRule {
  std::string channel;
  std::string layer_id;
  DeformMode mode;
  double gain = 0.0;  // px at the 1024 canvas for translate modes; unitless for scales
  Pivot pivot = Pivot::anchor;
};

struct ExpressionMapping {
  std::vector<ExpressionRule> rules;
};

/// Identity deformation plus additive per-rule displacements. Fitted weights
/// are never modified; expressions are per-frame overlays.
DeformedGeometry apply_expression(const Rig& rig, const ParamVector& fitted,
                                  const ExpressionFrame& frame,
                                  const ExpressionMapping& mapping);

/// One image per frame (apply_expression + render); deterministic.
std::vector<Image> render_timeline(const ModelPackage& pkg,
                                   const std::vector<ExpressionFrame>& frames,
                                   const ExpressionMapping& mapping,
                                   int workers = 0);

// Mapping / timeline JSON IO.
ExpressionMapping load_mapping(const std::string& path);
ExpressionMapping mapping_from_json_text(const std::string& text,
                                         const std::string& origin,
                                         const Rig* rig_for_validation = nullptr);
std::string mapping_to_json_text(const ExpressionMapping& mapping);
void validate_mapping(const ExpressionMapping& mapping, const Rig& rig);
std::vector<ExpressionFrame> load_timeline(const std::string& path);
void save_timeline(const std::vector<ExpressionFrame>& frames, const std::string& path);

}  // namespace toonrig
