#pragma once

#include <Eigen/Sparse>

#include "xthb/assembly.hpp"

namespace xthb {

/// Direct sparse solve of an assembled system. Throws std::runtime_error
/// with a diagnostic naming the likely cause (near-singular matrix from an
/// unstabilized sliver cut or an unconstrained mode) when factorization or
/// the solution fails.
Eigen::VectorXd solve_direct(const LinearSystem& sys);

/// 2-norm condition number estimate: power iteration on A^T A for the
/// largest singular value, inverse iteration through a sparse LU
/// factorization for the smallest.
double estimate_condition(const Eigen::SparseMatrix<double>& A, int iterations = 50);

}  // namespace xthb
