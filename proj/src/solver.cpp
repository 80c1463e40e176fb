#include "xthb/solver.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

namespace xthb {

Eigen::VectorXd solve_direct(const LinearSystem& sys) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(sys.A);
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sparse factorization failed (" << lu.lastErrorMessage()
        << "); the system is singular or near-singular, typically from an unstabilized "
           "sliver cut or a field without any Dirichlet data";
    throw std::runtime_error(msg.str());
  }
  Eigen::VectorXd x = lu.solve(sys.b);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("sparse back substitution failed on a singular factor");
  return x;
}

double estimate_condition(const Eigen::SparseMatrix<double>& A, int iterations) {
  const int n = int(A.rows());
  if (n == 0) return 1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Eigen::SparseMatrix<double> At = A.transpose();

  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  double smax2 = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd w = At * (A * v);
    smax2 = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return std::numeric_limits<double>::infinity();
    v = w / nw;
  }

  v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  double sinv2 = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd y = lu.adjoint().solve(v);
    Eigen::VectorXd w = lu.solve(y);
    sinv2 = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) break;
    v = w / nw;
  }
  if (sinv2 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(smax2 * sinv2);
}

}  // namespace xthb
