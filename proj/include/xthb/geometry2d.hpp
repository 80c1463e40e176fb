#pragma once

#include <algorithm>
#include <cmath>

namespace xthb {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double& operator[](int d) { return d == 0 ? x : y; }
  double operator[](int d) const { return d == 0 ? x : y; }

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

/// Axis-aligned box.
struct Box2 {
  Vec2 lo;
  Vec2 hi;

  double extent(int d) const { return hi[d] - lo[d]; }
  Vec2 center() const { return {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}; }
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  bool intersects(const Box2& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }

  friend bool operator==(const Box2&, const Box2&) = default;
};

/// Signed area of the triangle (a, b, c); positive for counterclockwise order.
inline double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace xthb
