#include "toonrig/image.hpp"

#include <cmath>

#include "toonrig/error.hpp"
#include "toonrig/geometry.hpp"

namespace toonrig {

Image::Image(int w, int h, std::array<uint8_t, 4> fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) fail_validation("image dimensions must be positive");
  pixels.resize(static_cast<size_t>(w) * h * 4);
  for (size_t i = 0; i < pixels.size(); i += 4) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
    pixels[i + 3] = fill[3];
  }
}

std::array<double, 4> Image::sample_bilinear(double x, double y) const {
  // Texel centers sit at integer+0.5.
  double fx = x - 0.5, fy = y - 0.5;
  int x0 = static_cast<int>(std::floor(fx));
  int y0 = static_cast<int>(std::floor(fy));
  double tx = fx - x0, ty = fy - y0;
  std::array<double, 4> out{0, 0, 0, 0};
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty);
      if (w == 0.0) continue;
      int px = x0 + dx, py = y0 + dy;
      if (!in_bounds(px, py)) continue;  // transparent outside
      const uint8_t* p = at(px, py);
      for (int c = 0; c < 4; ++c) out[c] += w * p[c];
    }
  }
  return out;
}

size_t BinaryMask::count() const {
  size_t n = 0;
  for (uint8_t b : bits) n += b;
  return n;
}

namespace {
inline uint8_t round_half_up(double v) {
  double r = std::floor(v + 0.5);
  if (r < 0) r = 0;
  if (r > 255) r = 255;
  return static_cast<uint8_t>(r);
}
}  // namespace

Image composite_over(const Image& bottom, const Image& top) {
  if (bottom.width != top.width || bottom.height != top.height)
    fail_validation("composite_over: dimension mismatch");
  Image out(bottom.width, bottom.height);
  size_t n = static_cast<size_t>(bottom.width) * bottom.height;
  for (size_t i = 0; i < n; ++i) {
    const uint8_t* b = &bottom.pixels[i * 4];
    const uint8_t* t = &top.pixels[i * 4];
    uint8_t* o = &out.pixels[i * 4];
    double at = t[3] / 255.0;
    double ab = b[3] / 255.0;
    double ao = at + ab * (1.0 - at);
    if (ao <= 0.0) {
      o[0] = o[1] = o[2] = o[3] = 0;
      continue;
    }
    for (int c = 0; c < 3; ++c) {
      double v = (t[c] * at + b[c] * ab * (1.0 - at)) / ao;
      o[c] = round_half_up(v);
    }
    o[3] = round_half_up(ao * 255.0);
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  // Disc structuring element offsets.
  std::vector<std::pair<int, int>> offs;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offs.emplace_back(dx, dy);
  BinaryMask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.get(x, y)) continue;
      for (auto [dx, dy] : offs) {
        int nx = x + dx, ny = y + dy;
        if (out.in_bounds(nx, ny)) out.set(nx, ny, true);
      }
    }
  }
  return out;
}

}  // namespace toonrig
