#pragma once

#include <array>
#include <vector>

#include "xthb/geometry2d.hpp"

namespace xthb {

struct QuadPoint {
  Vec2 p;
  double w = 0.0;
};

/// Dunavant quadrature on a physical triangle, exact for bivariate
/// polynomials of total degree <= `degree` (rules stored for degrees
/// 1, 2, 4, 5, 6, 8; the smallest sufficient one is used, degree <= 8).
/// Weights sum to the unsigned triangle area.
std::vector<QuadPoint> triangle_rule(const std::array<Vec2, 3>& v, int degree);

/// Gauss-Legendre quadrature along the segment a-b, exact for polynomials of
/// degree <= `degree` in the arclength parameter (degree <= 9). Weights sum
/// to the segment length.
std::vector<QuadPoint> segment_rule(const Vec2& a, const Vec2& b, int degree);

}  // namespace xthb
