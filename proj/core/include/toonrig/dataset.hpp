#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toonrig/rig.hpp"

namespace toonrig {

struct Sample {
  LandmarkSet landmarks;  // normalized, template ids
  ParamVector params;
};

struct Dataset {
  std::vector<Sample> samples;
  uint64_t rig_fingerprint = 0;
  uint64_t seed = 0;
  uint32_t dropped = 0;  // marker-association failures during generation
  std::vector<std::string> landmark_schema;
  std::vector<std::string> component_ids;
};

/// n weight vectors, each weight i.i.d. uniform on [-30, 30] from the seeded
/// generator. Rejects n = 0.
std::vector<ParamVector> sample_params(const Rig& rig, size_t n, uint64_t seed);

/// Full synthetic-corpus pipeline: sample -> render markers -> detect blobs ->
/// associate. Samples whose association fails are dropped and counted; a drop
/// rate above 1% is a hard error. Deterministic for fixed (rig, n, seed)
/// regardless of worker count.
Dataset build_dataset(const Rig& rig, size_t n, uint64_t seed, int workers = 0);

/// Binary container + JSON sidecar (<path>.json). Little-endian float32
/// records: landmarks (schema order, x then y) then params (component order,
/// x/y/scale) per sample.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Flattened views used by the regressor.
std::vector<float> flatten_landmarks(const Sample& s, const std::vector<std::string>& schema);
std::vector<float> flatten_params(const Sample& s, const std::vector<std::string>& component_ids);

}  // namespace toonrig
