#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "ccbm/fields.hpp"
#include "ccbm/physics.hpp"

namespace ccbm {

// Square complex saddle system with Gamma velocity DOFs eliminated
// symmetrically. Unknown ordering: free velocity DOFs, then pressures.
struct ComplexSparseSystem {
  Eigen::SparseMatrix<cdouble> A;
  Eigen::VectorXcd b;
  int n_free_velocity = 0;
  int n_pressure = 0;
  std::vector<int> vdof_to_reduced;  // full velocity DOF -> reduced index, -1 if fixed
  Eigen::VectorXcd lift;             // full velocity DOFs; Dirichlet values
};

ComplexSparseSystem assemble_state(const Mesh& mesh, const FeSpacePair& spaces,
                                   const PhysicsCase& cs);

// Same operator with the conjugate Robin coupling (-i on Sigma), momentum
// source u_i and continuity source p_i; homogeneous Dirichlet data on Gamma.
ComplexSparseSystem assemble_adjoint(const Mesh& mesh, const FeSpacePair& spaces,
                                     double alpha, const Eigen::VectorXd& source_u_i,
                                     const Eigen::VectorXd& source_p_i);

// Scatters a reduced solution vector into full velocity/pressure coefficients.
ComplexStokesField scatter(const ComplexSparseSystem& sys, const Eigen::VectorXcd& x);

// Raw (unconstrained) divergence block rows: row m, col full velocity DOF;
// entries -int psi_m div(phi). Used by the discrete-continuity checks.
Eigen::SparseMatrix<double> divergence_matrix(const Mesh& mesh, const FeSpacePair& spaces);

// --- real Stokes variants (auxiliary states and cross-checks) ---------------

struct RealStokesOptions {
  double alpha = 1.0;
  std::function<Vec2(const Vec2&)> f;        // body force
  std::function<Vec2(const Vec2&)> g;        // Dirichlet data on Gamma
  bool slip_on_sigma = false;                // u.n = 0 at Sigma velocity nodes
  bool fix_sigma_pressure_mean = false;      // Lagrange multiplier, int_Sigma p = 0
  // Optional natural boundary load on Sigma: adds int_Sigma load.phi ds,
  // evaluated per boundary edge at parameter s with position x and normal n.
  std::function<Vec2(int bedge, double s, const Vec2& x, const Vec2& n)> sigma_load;
};

struct RealStokesSolution {
  Eigen::VectorXd u;  // full velocity DOFs
  Eigen::VectorXd p;  // vertex pressures
};

RealStokesSolution solve_real_stokes(const Mesh& mesh, const FeSpacePair& spaces,
                                     const RealStokesOptions& opt);

}  // namespace ccbm
