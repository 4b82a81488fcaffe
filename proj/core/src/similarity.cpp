#include "toonrig/similarity.hpp"

#include <cmath>

#include "toonrig/error.hpp"

namespace toonrig {

Vec2 SimilarityTransform::apply(const Vec2& p) const {
  double c = std::cos(rotation) * scale;
  double s = std::sin(rotation) * scale;
  return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y};
}

SimilarityTransform SimilarityTransform::inverse() const {
  if (scale <= 0.0) fail_validation("cannot invert transform with non-positive scale");
  SimilarityTransform inv;
  inv.rotation = -rotation;
  inv.scale = 1.0 / scale;
  double c = std::cos(inv.rotation) * inv.scale;
  double s = std::sin(inv.rotation) * inv.scale;
  inv.translation = {-(c * translation.x - s * translation.y),
                     -(s * translation.x + c * translation.y)};
  return inv;
}

SimilarityTransform fit_similarity(const std::vector<Vec2>& src,
                                   const std::vector<Vec2>& dst) {
  if (src.size() != dst.size() || src.size() < 2)
    fail_validation("fit_similarity needs >= 2 point pairs of equal count");
  const size_t n = src.size();
  Vec2 sc, dc;
  for (size_t i = 0; i < n; ++i) {
    sc += src[i];
    dc += dst[i];
  }
  sc = sc * (1.0 / n);
  dc = dc * (1.0 / n);

  // Complex least squares: minimize sum |m * a_i - b_i|^2 over m = p + iq,
  // with centered a, b. m = (sum conj(a) b) / (sum |a|^2). Excludes
  // reflections; the optimum among rotation+scale maps.
  double denom = 0, p = 0, q = 0;
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = src[i] - sc;
    Vec2 b = dst[i] - dc;
    denom += a.squared_norm();
    p += a.dot(b);
    q += a.cross(b);
  }
  if (denom <= 0.0) fail_validation("fit_similarity: source points are all coincident");
  p /= denom;
  q /= denom;
  double scale = std::hypot(p, q);
  if (scale <= 0.0) fail_validation("fit_similarity: degenerate destination (zero scale)");

  SimilarityTransform t;
  t.rotation = std::atan2(q, p);
  t.scale = scale;
  // translation = dc - M * sc
  double c = p, s = q;  // M = scale * R(rotation) = [[p, -q], [q, p]]
  t.translation = {dc.x - (c * sc.x - s * sc.y), dc.y - (s * sc.x + c * sc.y)};
  return t;
}

double similarity_residual(const SimilarityTransform& t,
                           const std::vector<Vec2>& src,
                           const std::vector<Vec2>& dst) {
  double r = 0;
  for (size_t i = 0; i < src.size(); ++i) r += (t.apply(src[i]) - dst[i]).squared_norm();
  return r;
}

}  // namespace toonrig
