#pragma once

#include <Eigen/Sparse>

#include "ccbm/assembly.hpp"

namespace ccbm {

// Direct sparse LU solve of the assembled complex system. Contract: the
// relative residual |Ax-b|/|b| is at most 1e-10 (b = 0 yields x = 0);
// otherwise SingularMatrixError is thrown.
Eigen::VectorXcd solve(const ComplexSparseSystem& system);

// Same contract for real sparse systems.
Eigen::VectorXd solve_real(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b);

}  // namespace ccbm
