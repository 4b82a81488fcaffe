#pragma once

#include <vector>

#include "toonrig/image.hpp"

namespace toonrig {

struct Blob {
  Vec2 centroid;  // mean of member pixel centers, canvas px
  size_t area = 0;
};

/// 8-connected components of pixels with Rec.601 luminance > threshold,
/// sorted by area descending (ties by top-left member pixel).
std::vector<Blob> detect_blobs(const Image& image, double threshold = 200.0);

}  // namespace toonrig
