#include "ccbm/solve.hpp"

#include <Eigen/SparseLU>

namespace ccbm {

Eigen::VectorXcd solve(const ComplexSparseSystem& system) {
  if (system.b.norm() == 0.0) return Eigen::VectorXcd::Zero(system.A.rows());
  Eigen::SparseLU<Eigen::SparseMatrix<cdouble>> lu;
  lu.compute(system.A);
  if (lu.info() != Eigen::Success)
    throw SingularMatrixError("LU factorization failed (broken mesh or missing constraints?)");
  const Eigen::VectorXcd x = lu.solve(system.b);
  const double rel = (system.A * x - system.b).norm() / system.b.norm();
  if (!(rel <= 1e-10))
    throw SingularMatrixError("direct solve residual " + std::to_string(rel) +
                              " exceeds 1e-10");
  return x;
}

Eigen::VectorXd solve_real(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
  if (b.norm() == 0.0) return Eigen::VectorXd::Zero(A.rows());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SingularMatrixError("LU factorization failed on a real system");
  const Eigen::VectorXd x = lu.solve(b);
  const double rel = (A * x - b).norm() / b.norm();
  if (!(rel <= 1e-10))
    throw SingularMatrixError("real solve residual " + std::to_string(rel) +
                              " exceeds 1e-10");
  return x;
}

}  // namespace ccbm
