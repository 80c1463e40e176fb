#pragma once

#include <vector>

namespace xthb {

/// 1D Lagrange basis of degree p on the equispaced nodes 0, 1/p, ..., 1
/// (the single node 0.5 for p = 0 is not used; p >= 1 required).
/// Values or derivatives (with respect to the unit coordinate) of all p+1
/// shapes at t; any derivative order is accepted, orders > p give zeros.
void lagrange_basis_1d(int degree, double t, int deriv, double* out);

/// Nodes k/p, k = 0..p.
std::vector<double> lagrange_nodes_1d(int degree);

/// h-refinement extraction table for one child span (child in {0,1}):
/// row-major (p+1) x (p+1) matrix with T[i][j] = L_j((child + i/p)/2),
/// the parent shapes evaluated at the child's node positions.
std::vector<double> lagrange_href_table_1d(int degree, int child);

}  // namespace xthb
