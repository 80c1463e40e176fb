#include "xthb/lagrange.hpp"

#include <stdexcept>

namespace xthb {

namespace {

// Monomial coefficients of the p+1 shapes, cached per degree.
// coeff[j][k] multiplies t^k in L_j.
const std::vector<std::vector<double>>& shape_coefficients(int degree) {
  static std::vector<std::vector<std::vector<double>>> cache(16);
  if (degree < 1 || degree > 15) throw std::invalid_argument("lagrange: degree out of range");
  auto& entry = cache[degree];
  if (!entry.empty()) return entry;
  entry.resize(degree + 1);
  for (int j = 0; j <= degree; ++j) {
    std::vector<double> c{1.0};  // running product, lowest power first
    const double tj = double(j) / double(degree);
    for (int k = 0; k <= degree; ++k) {
      if (k == j) continue;
      const double tk = double(k) / double(degree);
      // multiply by (t - tk) / (tj - tk)
      std::vector<double> next(c.size() + 1, 0.0);
      const double inv = 1.0 / (tj - tk);
      for (std::size_t m = 0; m < c.size(); ++m) {
        next[m] += c[m] * (-tk) * inv;
        next[m + 1] += c[m] * inv;
      }
      c = std::move(next);
    }
    entry[j] = std::move(c);
  }
  return entry;
}

}  // namespace

void lagrange_basis_1d(int degree, double t, int deriv, double* out) {
  const auto& coeffs = shape_coefficients(degree);
  for (int j = 0; j <= degree; ++j) {
    const auto& c = coeffs[j];
    // Horner evaluation of the deriv-th derivative.
    double r = 0.0;
    for (int k = int(c.size()) - 1; k >= deriv; --k) {
      double f = 1.0;
      for (int m = 0; m < deriv; ++m) f *= double(k - m);
      r = r * t + f * c[k];
    }
    out[j] = r;
  }
}

std::vector<double> lagrange_nodes_1d(int degree) {
  std::vector<double> n(degree + 1);
  for (int k = 0; k <= degree; ++k) n[k] = double(k) / double(degree);
  return n;
}

std::vector<double> lagrange_href_table_1d(int degree, int child) {
  if (child != 0 && child != 1) throw std::invalid_argument("lagrange_href_table_1d: child");
  const int n = degree + 1;
  std::vector<double> table(n * n);
  for (int i = 0; i < n; ++i) {
    const double t = (double(child) + double(i) / double(degree)) * 0.5;
    lagrange_basis_1d(degree, t, 0, &table[i * n]);
  }
  return table;
}

}  // namespace xthb
