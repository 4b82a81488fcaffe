#include "toonrig/blob.hpp"

#include <algorithm>
#include <numeric>

namespace toonrig {

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<Blob> detect_blobs(const Image& image, double threshold) {
  const int w = image.width, h = image.height;
  std::vector<int> label(static_cast<size_t>(w) * h, -1);
  std::vector<int> parent;

  auto bright = [&](int x, int y) {
    return luminance(image.at(x, y)) > threshold;
  };

  // Two-pass union-find labeling, 8-connectivity.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bright(x, y)) continue;
      int best = -1;
      // Neighbors already visited in raster order: W, NW, N, NE.
      const int nx[4] = {x - 1, x - 1, x, x + 1};
      const int ny[4] = {y, y - 1, y - 1, y - 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w) continue;
        int l = label[static_cast<size_t>(ny[k]) * w + nx[k]];
        if (l < 0) continue;
        int root = find_root(parent, l);
        if (best < 0) {
          best = root;
        } else if (root != best) {
          parent[std::max(root, best)] = std::min(root, best);
          best = std::min(root, best);
        }
      }
      if (best < 0) {
        best = static_cast<int>(parent.size());
        parent.push_back(best);
      }
      label[static_cast<size_t>(y) * w + x] = best;
    }
  }

  struct Acc {
    double sx = 0, sy = 0;
    size_t n = 0;
    int min_y = 1 << 30, min_x = 1 << 30;
  };
  std::vector<Acc> acc(parent.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int l = label[static_cast<size_t>(y) * w + x];
      if (l < 0) continue;
      int root = find_root(parent, l);
      Acc& a = acc[root];
      a.sx += x + 0.5;  // pixel centers
      a.sy += y + 0.5;
      a.n += 1;
      if (y < a.min_y || (y == a.min_y && x < a.min_x)) {
        a.min_y = y;
        a.min_x = x;
      }
    }
  }

  std::vector<std::pair<Acc, int>> roots;
  for (size_t i = 0; i < acc.size(); ++i)
    if (acc[i].n > 0) roots.push_back({acc[i], static_cast<int>(i)});
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.first.n != b.first.n) return a.first.n > b.first.n;
    if (a.first.min_y != b.first.min_y) return a.first.min_y < b.first.min_y;
    return a.first.min_x < b.first.min_x;
  });

  std::vector<Blob> blobs;
  blobs.reserve(roots.size());
  for (const auto& [a, _] : roots)
    blobs.push_back({{a.sx / a.n, a.sy / a.n}, a.n});
  return blobs;
}

}  // namespace toonrig
