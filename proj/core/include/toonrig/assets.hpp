#pragma once

#include <string>

#include "toonrig/anim.hpp"
#include "toonrig/image.hpp"
#include "toonrig/rig.hpp"

namespace toonrig {

/// The built-in character template: six feature components, base face and
/// hair layers, 59 template landmarks, 1024 canvas.
Rig make_default_rig();

/// Procedural cartoon art for the default rig's atlas (2048x1024, binary
/// alpha). Iris color is kept far from skin tone so occlusion artifacts are
/// measurable.
Image make_default_atlas(const Rig& rig);

/// Default expression mapping (13 channels bound).
ExpressionMapping make_default_mapping();
std::string default_mapping_json();

/// Reference colors used by the default art.
struct DefaultColors {
  static constexpr std::array<uint8_t, 4> skin = {232, 196, 170, 255};
  static constexpr std::array<uint8_t, 4> iris = {46, 98, 196, 255};
};

/// Self-reconstruction fixture: a portrait rendered from the rig at `params`
/// plus its landmark file content (displaced template landmarks, pixel
/// coords). The exact round-trip test bed.
struct Fixture {
  Image portrait;
  LandmarkSet landmarks;  // normalized by canvas
};
Fixture make_fixture(const Rig& rig, const Image& atlas, const ParamVector& params);

/// A small demo timeline (blink ramp + smile) for the animate command.
std::string default_timeline_json();

}  // namespace toonrig
