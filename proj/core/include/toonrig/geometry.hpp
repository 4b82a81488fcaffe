#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace toonrig {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

/// Axis-aligned rectangle in pixel coordinates, origin top-left, y-down.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int px, int py) const {
    return px >= x && py >= y && px < x + w && py < y + h;
  }
  bool empty() const { return w <= 0 || h <= 0; }
};

struct Bounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

  static Bounds of(const std::vector<Vec2>& pts) {
    Bounds b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
    for (const auto& p : pts) {
      b.min_x = std::min(b.min_x, p.x);
      b.min_y = std::min(b.min_y, p.y);
      b.max_x = std::max(b.max_x, p.x);
      b.max_y = std::max(b.max_y, p.y);
    }
    return b;
  }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  Bounds united(const Bounds& o) const {
    return {std::min(min_x, o.min_x), std::min(min_y, o.min_y),
            std::max(max_x, o.max_x), std::max(max_y, o.max_y)};
  }
  Bounds dilated(double m) const {
    return {min_x - m, min_y - m, max_x + m, max_y + m};
  }
  bool contains(double px, double py) const {
    return px >= min_x && py >= min_y && px <= max_x && py <= max_y;
  }
};

/// Convex hull (Andrew monotone chain), counter-clockwise in y-down coords.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

/// Signed distance of p to the hull: <= 0 inside, > 0 outside (euclidean).
double distance_to_hull(const std::vector<Vec2>& hull, const Vec2& p);

}  // namespace toonrig
