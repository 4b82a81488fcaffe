#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>

namespace toonrig {

/// FNV-1a 64-bit. Used for rig fingerprints and package provenance checks;
/// an integrity check, not a cryptographic one.
inline uint64_t fnv1a64(std::span<const uint8_t> data,
                        uint64_t seed = 0xcbf29ce484222325ull) {
  uint64_t h = seed;
  for (uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

inline std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

/// FNV-1a 64 of a file's raw bytes. Throws on IO failure.
uint64_t hash_file(const std::string& path);

}  // namespace toonrig
