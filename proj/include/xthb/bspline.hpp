#pragma once

#include <vector>

namespace xthb {

/// Value (or `deriv`-th derivative) of the cardinal uniform B-spline of degree
/// `degree` with knots 0, 1, ..., degree+1, evaluated at t. Outside [0, degree+1]
/// the value is zero. Derivative orders up to degree+1 are supported; the
/// (degree+1)-th derivative is zero almost everywhere and is returned as zero.
double cardinal_bspline(int degree, double t, int deriv = 0);

/// Two-scale subdivision coefficients c_j, j = 0..degree+1, such that
/// N_p(t) = sum_j c_j N_p(2t - j), with c_j = 2^-p * binomial(p+1, j).
std::vector<double> subdivision_coefficients(int degree);

/// Values (or lattice-coordinate derivatives) of the degree+1 B-splines that are
/// nonzero on one knot span, at local coordinate u in [0,1] within the span.
/// out[a] is the function with lattice index (e - degree + a) on span e; the
/// result does not depend on e. Derivatives are with respect to the lattice
/// coordinate; callers apply the 1/h^deriv scaling of the actual grid.
void element_basis_1d(int degree, double u, int deriv, double* out);

/// Two-level transfer matrix restricted to one child span (child in {0,1}):
/// row-major (p+1) x (p+1) matrix M with
///   parent-local function a = sum_b M[a*(p+1)+b] * child-local function b
/// on the child span.
std::vector<double> subdivision_transfer_1d(int degree, int child);

double binomial(int n, int k);

}  // namespace xthb
