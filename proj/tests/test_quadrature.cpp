#include <cmath>
#include <vector>

#include "doctest.h"
#include "xthb/quadrature.hpp"

using namespace xthb;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// exact integral of x^a y^b over the unit triangle (0,0)-(1,0)-(0,1)
double unit_tri_monomial(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

double integrate_tri(const std::array<Vec2, 3>& v, int degree, int a, int b) {
  double s = 0.0;
  for (const QuadPoint& q : triangle_rule(v, degree))
    s += q.w * std::pow(q.p.x, a) * std::pow(q.p.y, b);
  return s;
}

}  // namespace

TEST_CASE("triangle rules integrate monomials exactly up to their degree") {
  const std::array<Vec2, 3> unit = {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
  for (int degree = 1; degree <= 8; ++degree)
    for (int a = 0; a + 0 <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        INFO("degree ", degree, " monomial x^", a, " y^", b);
        CHECK(integrate_tri(unit, degree, a, b) ==
              doctest::Approx(unit_tri_monomial(a, b)).epsilon(1e-13));
      }
}

TEST_CASE("triangle rule weights sum to the area for any orientation") {
  const std::array<Vec2, 3> ccw = {Vec2{0.2, -0.3}, Vec2{1.7, 0.1}, Vec2{0.4, 2.2}};
  const std::array<Vec2, 3> cw = {ccw[0], ccw[2], ccw[1]};
  const double area = std::abs(tri_area(ccw[0], ccw[1], ccw[2]));
  for (int degree : {1, 2, 3, 4, 5, 6, 7, 8}) {
    double sccw = 0.0, scw = 0.0;
    for (const QuadPoint& q : triangle_rule(ccw, degree)) sccw += q.w;
    for (const QuadPoint& q : triangle_rule(cw, degree)) scw += q.w;
    CHECK(sccw == doctest::Approx(area).epsilon(1e-14));
    CHECK(scw == doctest::Approx(area).epsilon(1e-14));
  }
}

TEST_CASE("triangle rules are consistent under midpoint subdivision") {
  const std::array<Vec2, 3> tri = {Vec2{-0.4, 0.7}, Vec2{1.3, 0.9}, Vec2{0.2, 1.8}};
  const Vec2 m01 = 0.5 * (tri[0] + tri[1]), m12 = 0.5 * (tri[1] + tri[2]),
             m20 = 0.5 * (tri[2] + tri[0]);
  const std::array<std::array<Vec2, 3>, 4> subs = {{{tri[0], m01, m20},
                                                    {m01, tri[1], m12},
                                                    {m20, m12, tri[2]},
                                                    {m01, m12, m20}}};
  for (int degree : {2, 5, 8})
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        double whole = integrate_tri(tri, degree, a, b);
        double split = 0.0;
        for (const auto& s : subs) split += integrate_tri(s, degree, a, b);
        CHECK(whole == doctest::Approx(split).epsilon(1e-12));
      }
}

TEST_CASE("all triangle quadrature points lie inside the triangle") {
  const std::array<Vec2, 3> tri = {Vec2{0.0, 0.0}, Vec2{2.0, 0.5}, Vec2{0.5, 1.5}};
  const double area = tri_area(tri[0], tri[1], tri[2]);
  for (int degree : {1, 2, 4, 5, 6, 8})
    for (const QuadPoint& q : triangle_rule(tri, degree)) {
      // barycentric coordinates via sub-areas
      const double l0 = tri_area(q.p, tri[1], tri[2]) / area;
      const double l1 = tri_area(tri[0], q.p, tri[2]) / area;
      const double l2 = tri_area(tri[0], tri[1], q.p) / area;
      CHECK(l0 > 0.0);
      CHECK(l1 > 0.0);
      CHECK(l2 > 0.0);
      CHECK(l0 + l1 + l2 == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("expected point counts per stored rule") {
  const std::array<Vec2, 3> unit = {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
  CHECK(triangle_rule(unit, 1).size() == 1);
  CHECK(triangle_rule(unit, 2).size() == 3);
  CHECK(triangle_rule(unit, 3).size() == 6);  // promoted to the degree-4 rule
  CHECK(triangle_rule(unit, 4).size() == 6);
  CHECK(triangle_rule(unit, 5).size() == 7);
  CHECK(triangle_rule(unit, 6).size() == 12);
  CHECK(triangle_rule(unit, 8).size() == 16);
  CHECK_THROWS_AS(triangle_rule(unit, 9), std::invalid_argument);
}

TEST_CASE("segment rules integrate arclength polynomials exactly") {
  const Vec2 a{0.3, -0.2}, b{1.9, 1.0};
  const double len = (b - a).norm();
  for (int degree = 0; degree <= 9; ++degree)
    for (int k = 0; k <= degree; ++k) {
      // integrate t^k over the segment parameterized by t in [0, 1]
      double s = 0.0;
      for (const QuadPoint& q : segment_rule(a, b, degree)) {
        const double t = (q.p - a).norm() / len;
        s += q.w * std::pow(t, k);
      }
      CHECK(s == doctest::Approx(len / (k + 1)).epsilon(1e-13));
    }
  CHECK_THROWS_AS(segment_rule(a, b, 10), std::invalid_argument);

  double total = 0.0;
  for (const QuadPoint& q : segment_rule(a, b, 7)) total += q.w;
  CHECK(total == doctest::Approx(len).epsilon(1e-14));
  CHECK(segment_rule(a, b, 7).size() == 4);
  CHECK(segment_rule(a, b, 0).size() == 1);
}
