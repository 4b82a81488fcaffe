#include "toonrig/inpaint.hpp"

#include <cmath>

#include "toonrig/error.hpp"
#include "toonrig/parallel.hpp"

namespace toonrig {

Image inpaint(const Image& image, const BinaryMask& mask, const InpaintOptions& opts) {
  if (mask.width != image.width || mask.height != image.height)
    fail_validation("inpaint: mask dimensions do not match image");

  const int w = image.width, h = image.height;
  std::vector<size_t> masked;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.get(x, y)) masked.push_back(static_cast<size_t>(y) * w + x);
  if (masked.empty()) return image;

  // Every connected masked region must touch at least one known pixel,
  // otherwise the equilibrium is undefined.
  {
    std::vector<uint8_t> seen(static_cast<size_t>(w) * h, 0);
    for (size_t seed : masked) {
      if (seen[seed]) continue;
      std::vector<size_t> stack{seed};
      std::vector<size_t> region;
      bool has_boundary = false;
      seen[seed] = 1;
      while (!stack.empty()) {
        size_t i = stack.back();
        stack.pop_back();
        region.push_back(i);
        int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
          size_t j = static_cast<size_t>(ny[k]) * w + nx[k];
          if (!mask.get(nx[k], ny[k])) {
            has_boundary = true;
          } else if (!seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
      if (!has_boundary)
        fail_validation("inpaint: masked region has no known neighbor (mask covers "
                        "the image border or the whole image)");
    }
  }

  // Working buffers in double, 0..255 scale. Masked pixels start at the mean
  // of the known boundary ring so the constant case converges immediately.
  std::vector<std::array<double, 4>> cur(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const uint8_t* p = image.at(x, y);
      cur[static_cast<size_t>(y) * w + x] = {static_cast<double>(p[0]),
                                             static_cast<double>(p[1]),
                                             static_cast<double>(p[2]),
                                             static_cast<double>(p[3])};
    }
  {
    std::array<double, 4> boundary_sum{0, 0, 0, 0};
    size_t boundary_n = 0;
    for (size_t i : masked) {
      int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        if (mask.get(nx[k], ny[k])) continue;
        const uint8_t* p = image.at(nx[k], ny[k]);
        for (int c = 0; c < 4; ++c) boundary_sum[c] += p[c];
        ++boundary_n;
      }
    }
    std::array<double, 4> mean{0, 0, 0, 0};
    for (int c = 0; c < 4; ++c) mean[c] = boundary_sum[c] / static_cast<double>(boundary_n);
    for (size_t i : masked) cur[i] = mean;
  }

  // Jacobi iteration: next value from the previous iterate only, so the
  // result is independent of traversal order and worker count.
  std::vector<std::array<double, 4>> next = cur;
  std::vector<double> max_change(masked.size(), 0.0);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    parallel_for(masked.size(), opts.workers, [&](size_t begin, size_t end) {
      for (size_t mi = begin; mi < end; ++mi) {
        size_t i = masked[mi];
        int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        std::array<double, 4> sum{0, 0, 0, 0};
        int n = 0;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
          const auto& v = cur[static_cast<size_t>(ny[k]) * w + nx[k]];
          for (int c = 0; c < 4; ++c) sum[c] += v[c];
          ++n;
        }
        std::array<double, 4> v;
        double change = 0;
        for (int c = 0; c < 4; ++c) {
          v[c] = sum[c] / n;
          change = std::max(change, std::abs(v[c] - cur[i][c]));
        }
        next[i] = v;
        max_change[mi] = change;
      }
    });
    for (size_t mi = 0; mi < masked.size(); ++mi) cur[masked[mi]] = next[masked[mi]];
    double change = 0;
    for (double c : max_change) change = std::max(change, c);
    if (change < opts.tol) break;
  }

  Image out = image;  // unmasked pixels untouched bit-exactly
  for (size_t i : masked) {
    uint8_t* p = &out.pixels[i * 4];
    for (int c = 0; c < 4; ++c) {
      double r = std::floor(cur[i][c] + 0.5);
      p[c] = static_cast<uint8_t>(std::clamp(r, 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace toonrig
