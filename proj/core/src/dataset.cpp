#include "toonrig/dataset.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "toonrig/assign.hpp"
#include "toonrig/blob.hpp"
#include "toonrig/error.hpp"
#include "toonrig/hash.hpp"
#include "toonrig/parallel.hpp"
#include "toonrig/raster.hpp"
#include "toonrig/rng.hpp"

using nlohmann::json;

namespace toonrig {

std::vector<ParamVector> sample_params(const Rig& rig, size_t n, uint64_t seed) {
  if (n == 0) fail_validation("sample_params: n must be >= 1");
  Rng rng(seed);
  std::vector<ParamVector> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    ParamVector p;
    for (const auto& c : rig.components) {
      std::array<double, 3> w;
      for (int a = 0; a < 3; ++a) w[a] = rng.uniform(-kWeightLimit, kWeightLimit);
      p.entries[c.id] = w;
    }
    out.push_back(std::move(p));
  }
  return out;
}

Dataset build_dataset(const Rig& rig, size_t n, uint64_t seed, int workers) {
  std::vector<ParamVector> params = sample_params(rig, n, seed);

  // One slot per sample so assembly order is index order regardless of
  // worker count.
  std::vector<std::optional<Sample>> slots(n);
  parallel_for(n, workers, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      Image markers = render_markers(rig, params[i], {}, {.workers = 1});
      std::vector<Blob> blobs = detect_blobs(markers);
      if (blobs.size() != rig.template_landmarks.points.size()) continue;  // drop
      Sample s;
      s.landmarks = associate_landmarks(blobs, rig.template_landmarks, rig.canvas_size);
      s.params = params[i];
      slots[i] = std::move(s);
    }
  });

  Dataset ds;
  ds.rig_fingerprint = rig.fingerprint();
  ds.seed = seed;
  ds.landmark_schema = rig.landmark_schema();
  ds.component_ids = rig.component_ids();
  for (auto& slot : slots) {
    if (slot)
      ds.samples.push_back(std::move(*slot));
    else
      ds.dropped += 1;
  }
  if (ds.dropped * 100 > n)
    fail_runtime("marker association drop rate above 1% (" +
                 std::to_string(ds.dropped) + "/" + std::to_string(n) +
                 "): rig markers collide too often");
  return ds;
}

std::vector<float> flatten_landmarks(const Sample& s, const std::vector<std::string>& schema) {
  std::vector<float> out;
  out.reserve(schema.size() * 2);
  for (const auto& id : schema) {
    auto it = s.landmarks.points.find(id);
    if (it == s.landmarks.points.end())
      fail_validation("sample missing landmark '" + id + "'");
    out.push_back(static_cast<float>(it->second.x));
    out.push_back(static_cast<float>(it->second.y));
  }
  return out;
}

std::vector<float> flatten_params(const Sample& s, const std::vector<std::string>& component_ids) {
  std::vector<float> out;
  out.reserve(component_ids.size() * 3);
  for (const auto& id : component_ids) {
    auto it = s.params.entries.find(id);
    if (it == s.params.entries.end())
      fail_validation("sample missing params for component '" + id + "'");
    for (int a = 0; a < 3; ++a) out.push_back(static_cast<float>(it->second[a]));
  }
  return out;
}

// --- binary container -------------------------------------------------------
//
// magic "TRDS" | u32 version | u64 rig fingerprint | u64 seed |
// u32 landmark count L | u32 param count P | u64 sample count | u32 dropped |
// L ids | C component ids | records: per sample 2L float32 then P float32.
// Strings are u32 length + bytes. Little-endian throughout.

namespace {

constexpr char kDatasetMagic[4] = {'T', 'R', 'D', 'S'};
constexpr uint32_t kDatasetVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  uint32_t n = read_pod<uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_runtime("cannot write dataset file " + path);
  out.write(kDatasetMagic, 4);
  write_pod<uint32_t>(out, kDatasetVersion);
  write_pod<uint64_t>(out, ds.rig_fingerprint);
  write_pod<uint64_t>(out, ds.seed);
  write_pod<uint32_t>(out, static_cast<uint32_t>(ds.landmark_schema.size()));
  write_pod<uint32_t>(out, static_cast<uint32_t>(ds.component_ids.size() * 3));
  write_pod<uint64_t>(out, ds.samples.size());
  write_pod<uint32_t>(out, ds.dropped);
  for (const auto& id : ds.landmark_schema) write_string(out, id);
  for (const auto& id : ds.component_ids) write_string(out, id);
  for (const auto& s : ds.samples) {
    std::vector<float> lm = flatten_landmarks(s, ds.landmark_schema);
    std::vector<float> pm = flatten_params(s, ds.component_ids);
    out.write(reinterpret_cast<const char*>(lm.data()),
              static_cast<std::streamsize>(lm.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(pm.data()),
              static_cast<std::streamsize>(pm.size() * sizeof(float)));
  }
  if (!out) fail_runtime("short write to dataset file " + path);

  json sidecar{{"magic", "TRDS"},
               {"version", kDatasetVersion},
               {"rig_fingerprint", hex64(ds.rig_fingerprint)},
               {"seed", ds.seed},
               {"landmark_count", ds.landmark_schema.size()},
               {"param_count", ds.component_ids.size() * 3},
               {"sample_count", ds.samples.size()},
               {"dropped", ds.dropped}};
  std::ofstream side(path + ".json", std::ios::binary);
  if (!side) fail_runtime("cannot write dataset sidecar " + path + ".json");
  side << sidecar.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open dataset file " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kDatasetMagic, 4) != 0)
    fail_validation(path + ": not a dataset file (bad magic)");
  uint32_t version = read_pod<uint32_t>(in);
  if (version != kDatasetVersion)
    fail_validation(path + ": unsupported dataset version " + std::to_string(version));
  Dataset ds;
  ds.rig_fingerprint = read_pod<uint64_t>(in);
  ds.seed = read_pod<uint64_t>(in);
  uint32_t L = read_pod<uint32_t>(in);
  uint32_t P = read_pod<uint32_t>(in);
  uint64_t count = read_pod<uint64_t>(in);
  ds.dropped = read_pod<uint32_t>(in);
  for (uint32_t i = 0; i < L; ++i) ds.landmark_schema.push_back(read_string(in));
  if (P % 3 != 0) fail_validation(path + ": param count not a multiple of 3");
  for (uint32_t i = 0; i < P / 3; ++i) ds.component_ids.push_back(read_string(in));

  ds.samples.reserve(count);
  std::vector<float> lm(2 * L), pm(P);
  for (uint64_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(lm.data()),
            static_cast<std::streamsize>(lm.size() * sizeof(float)));
    in.read(reinterpret_cast<char*>(pm.data()),
            static_cast<std::streamsize>(pm.size() * sizeof(float)));
    if (!in) fail_validation(path + ": truncated at sample " + std::to_string(i));
    Sample s;
    for (uint32_t l = 0; l < L; ++l) {
      s.landmarks.points[ds.landmark_schema[l]] = {lm[2 * l], lm[2 * l + 1]};
    }
    for (uint32_t c = 0; c < P / 3; ++c) {
      s.params.entries[ds.component_ids[c]] = {pm[3 * c], pm[3 * c + 1], pm[3 * c + 2]};
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace toonrig
