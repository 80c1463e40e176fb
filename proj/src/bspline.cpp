#include "xthb/bspline.hpp"

#include <cmath>
#include <stdexcept>

namespace xthb {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
  return r;
}

namespace {

// Point value of the cardinal B-spline via Cox-de Boor on integer knots,
// half-open span convention.
double cardinal_value(int degree, double t) {
  if (t < 0.0 || t >= degree + 1) return 0.0;
  double vals[32];
  for (int j = 0; j <= degree; ++j) vals[j] = (t >= j && t < j + 1) ? 1.0 : 0.0;
  for (int d = 1; d <= degree; ++d) {
    for (int j = 0; j + d <= degree; ++j) {
      vals[j] = ((t - j) * vals[j] + (j + d + 1 - t) * vals[j + 1]) / double(d);
    }
  }
  return vals[0];
}

// Values at local coordinate u of the polynomial pieces, restricted to one knot
// span, of the degree+1 functions that are nonzero there. Valid for any u
// (including span boundaries, where it yields the one-sided limit from inside).
void span_basis(int degree, double u, double* out) {
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / double(j);
      out[r] = saved + (double(r + 1) - u) * temp;
      saved = (u - 1.0 + double(j - r)) * temp;
    }
    out[j] = saved;
  }
}

}  // namespace

double cardinal_bspline(int degree, double t, int deriv) {
  if (degree < 0 || degree > 30) throw std::invalid_argument("cardinal_bspline: bad degree");
  if (deriv < 0 || deriv > degree + 1)
    throw std::invalid_argument("cardinal_bspline: unsupported derivative order");
  if (deriv == degree + 1) return 0.0;
  if (deriv == 0) return cardinal_value(degree, t);
  // d^k N_p(t) = sum_i (-1)^i binom(k,i) N_{p-k}(t - i)
  double r = 0.0;
  for (int i = 0; i <= deriv; ++i) {
    double c = binomial(deriv, i);
    r += (i % 2 == 0 ? c : -c) * cardinal_value(degree - deriv, t - i);
  }
  return r;
}

std::vector<double> subdivision_coefficients(int degree) {
  std::vector<double> c(degree + 2);
  const double scale = std::ldexp(1.0, -degree);
  for (int j = 0; j <= degree + 1; ++j) c[j] = scale * binomial(degree + 1, j);
  return c;
}

void element_basis_1d(int degree, double u, int deriv, double* out) {
  if (deriv < 0 || deriv > degree + 1)
    throw std::invalid_argument("element_basis_1d: unsupported derivative order");
  if (deriv == degree + 1) {
    for (int a = 0; a <= degree; ++a) out[a] = 0.0;
    return;
  }
  if (deriv == 0) {
    span_basis(degree, u, out);
    return;
  }
  // Pieces of the degree-(p-k) functions on the span, then
  // d^k N_{f,p} = sum_i (-1)^i binom(k,i) N_{f+i, p-k}.
  const int q = degree - deriv;
  double low[32];
  span_basis(q, u, low);
  for (int a = 0; a <= degree; ++a) {
    double r = 0.0;
    for (int i = 0; i <= deriv; ++i) {
      const int ap = a + i - deriv;  // index into the lower-degree span basis
      if (ap < 0 || ap > q) continue;
      const double c = binomial(deriv, i);
      r += (i % 2 == 0 ? c : -c) * low[ap];
    }
    out[a] = r;
  }
}

std::vector<double> subdivision_transfer_1d(int degree, int child) {
  if (child != 0 && child != 1) throw std::invalid_argument("subdivision_transfer_1d: child");
  const int n = degree + 1;
  std::vector<double> m(n * n, 0.0);
  const double scale = std::ldexp(1.0, -degree);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int j = child + degree + b - 2 * a;
      if (j >= 0 && j <= degree + 1) m[a * n + b] = scale * binomial(degree + 1, j);
    }
  }
  return m;
}

}  // namespace xthb
