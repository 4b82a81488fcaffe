#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "toonrig/geometry.hpp"

namespace toonrig {

/// Row-major RGBA, 8 bits per channel, straight (non-premultiplied) alpha.
/// Pixel (x, y) covers [x, x+1) x [y, y+1); its center is (x+0.5, y+0.5).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // width * height * 4

  Image() = default;
  Image(int w, int h, std::array<uint8_t, 4> fill = {0, 0, 0, 0});

  uint8_t* at(int x, int y) { return &pixels[(static_cast<size_t>(y) * width + x) * 4]; }
  const uint8_t* at(int x, int y) const {
    return &pixels[(static_cast<size_t>(y) * width + x) * 4];
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }

  void set(int x, int y, std::array<uint8_t, 4> rgba) {
    uint8_t* p = at(x, y);
    p[0] = rgba[0]; p[1] = rgba[1]; p[2] = rgba[2]; p[3] = rgba[3];
  }

  /// Bilinear sample at continuous coords; outside the image is transparent.
  /// Channels are interpolated independently (straight alpha).
  std::array<double, 4> sample_bilinear(double x, double y) const;
};

/// Rec. 601 luma of an RGB triple.
inline double luminance(const uint8_t* px) {
  return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
}

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;  // 0 or 1, row-major

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}

  uint8_t get(int x, int y) const { return bits[static_cast<size_t>(y) * width + x]; }
  void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  size_t count() const;
};

/// Porter-Duff source-over with straight alpha; integer channels rounded
/// half-up. Dimension mismatch is an error.
Image composite_over(const Image& bottom, const Image& top);

/// Morphological dilation by a disc structuring element of radius r (pixels).
BinaryMask dilate(const BinaryMask& mask, int radius);

// PNG IO (RGBA8 for images; 1-bit grayscale for masks).
Image read_png(const std::string& path);
void write_png(const Image& img, const std::string& path);
BinaryMask read_mask_png(const std::string& path);
void write_mask_png(const BinaryMask& mask, const std::string& path);

}  // namespace toonrig
