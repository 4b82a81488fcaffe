#pragma once

#include <vector>

#include "toonrig/geometry.hpp"

namespace toonrig {

/// Rotation + uniform scale + translation (no reflection).
struct SimilarityTransform {
  double rotation = 0.0;  // radians
  double scale = 1.0;     // > 0
  Vec2 translation;

  Vec2 apply(const Vec2& p) const;
  SimilarityTransform inverse() const;
  static SimilarityTransform identity() { return {}; }
};

/// Least-squares similarity minimizing sum ||T(src_i) - dst_i||^2 over
/// rotation, positive scale and translation (closed form; Procrustes without
/// reflection). Needs >= 2 non-coincident source points.
SimilarityTransform fit_similarity(const std::vector<Vec2>& src,
                                   const std::vector<Vec2>& dst);

/// Residual sum of squares of a transform against point pairs.
double similarity_residual(const SimilarityTransform& t,
                           const std::vector<Vec2>& src,
                           const std::vector<Vec2>& dst);

}  // namespace toonrig
