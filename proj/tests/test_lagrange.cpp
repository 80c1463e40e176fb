#include "xthb/lagrange.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace xthb;

TEST_CASE("Lagrange shapes interpolate at their nodes") {
  double out[8];
  for (int p = 1; p <= 4; ++p) {
    const auto nodes = lagrange_nodes_1d(p);
    REQUIRE(int(nodes.size()) == p + 1);
    for (int k = 0; k <= p; ++k) {
      lagrange_basis_1d(p, nodes[k], 0, out);
      for (int j = 0; j <= p; ++j) CHECK(out[j] == doctest::Approx(j == k ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("Lagrange shapes reproduce monomials with exact derivatives") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double out[8];
  for (int p = 1; p <= 4; ++p) {
    const auto nodes = lagrange_nodes_1d(p);
    for (int q = 0; q <= p; ++q) {
      for (int k = 0; k < 30; ++k) {
        const double t = dist(rng);
        for (int deriv = 0; deriv <= 2; ++deriv) {
          lagrange_basis_1d(p, t, deriv, out);
          double value = 0.0;
          for (int j = 0; j <= p; ++j) value += std::pow(nodes[j], q) * out[j];
          double expected = 0.0;
          if (q >= deriv) {
            expected = std::pow(t, q - deriv);
            for (int m = 0; m < deriv; ++m) expected *= double(q - m);
          }
          CHECK(value == doctest::Approx(expected).epsilon(1e-11));
        }
      }
    }
  }
}

TEST_CASE("Lagrange derivative orders above the degree vanish") {
  double out[8];
  lagrange_basis_1d(2, 0.3, 3, out);
  for (int j = 0; j <= 2; ++j) CHECK(out[j] == 0.0);
}

TEST_CASE("h-refinement table reference rows for degree 2") {
  const auto left = lagrange_href_table_1d(2, 0);
  const double expected_left[9] = {1.0,     0.0,      0.0,      //
                                   3.0 / 8, 6.0 / 8,  -1.0 / 8, //
                                   0.0,     1.0,      0.0};
  for (int k = 0; k < 9; ++k) CHECK(left[k] == doctest::Approx(expected_left[k]));

  const auto right = lagrange_href_table_1d(2, 1);
  const double expected_right[9] = {0.0,      1.0,     0.0,     //
                                    -1.0 / 8, 6.0 / 8, 3.0 / 8, //
                                    0.0,      0.0,     1.0};
  for (int k = 0; k < 9; ++k) CHECK(right[k] == doctest::Approx(expected_right[k]));
}

TEST_CASE("h-refinement tables reproduce the parent polynomial on child nodes") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double shapes[8];
  for (int p = 1; p <= 4; ++p) {
    double coeff[8];
    for (int j = 0; j <= p; ++j) coeff[j] = dist(rng);
    for (int c = 0; c <= 1; ++c) {
      const auto table = lagrange_href_table_1d(p, c);
      for (int i = 0; i <= p; ++i) {
        const double t = (c + double(i) / p) * 0.5;
        lagrange_basis_1d(p, t, 0, shapes);
        double direct = 0.0, via_table = 0.0;
        for (int j = 0; j <= p; ++j) {
          direct += coeff[j] * shapes[j];
          via_table += coeff[j] * table[i * (p + 1) + j];
        }
        CHECK(via_table == doctest::Approx(direct).epsilon(1e-12));
      }
    }
  }
}
