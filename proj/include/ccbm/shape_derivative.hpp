#pragma once

#include "ccbm/curvature.hpp"
#include "ccbm/fields.hpp"
#include "ccbm/physics.hpp"

namespace ccbm {

struct ShapeDerivativeReport {
  double dJ_boundary = 0.0;
  double dJ_distributed = 0.0;
  struct Row {
    double t = 0.0;
    double fd_quotient = 0.0;
    double err_boundary = 0.0;     // relative
    double err_distributed = 0.0;  // relative
  };
  std::vector<Row> rows;
};

// The boundary (Hadamard) form of dJ assembled as a linear functional on
// piecewise-linear displacement DOFs. The viscous kernel term is integrated
// by parts tangentially, so only first arclength derivatives appear; the
// remaining curvature terms use the smoothed curvature field.
Eigen::VectorXd shape_derivative_boundary_functional(
    const Mesh& mesh, const FeSpacePair& spaces, const PhysicsCase& cs,
    const ComplexStokesField& state, const ComplexStokesField& adjoint,
    const CurvatureField& curv);

double shape_derivative_boundary(const Mesh& mesh, const FeSpacePair& spaces,
                                 const PhysicsCase& cs, const ComplexStokesField& state,
                                 const ComplexStokesField& adjoint,
                                 const CurvatureField& curv, const DisplacementField& theta);

// Volume (distributed) form of the same derivative; needs the spatial
// Jacobian of the forcing.
double shape_derivative_distributed(const Mesh& mesh, const FeSpacePair& spaces,
                                    const PhysicsCase& cs, const ComplexStokesField& state,
                                    const ComplexStokesField& adjoint,
                                    const DisplacementField& theta);

// Alternative boundary kernel written with one-sided second normal
// derivatives; a cross-check, not the default.
double shape_derivative_boundary_second_form(const Mesh& mesh, const FeSpacePair& spaces,
                                             const PhysicsCase& cs,
                                             const ComplexStokesField& state,
                                             const ComplexStokesField& adjoint,
                                             const DisplacementField& theta);

// Riesz representative of -dJ in the H1 inner product over piecewise-linear
// fields vanishing on Gamma, so dJ[theta] = -|theta|_H1^2 exactly at the
// discrete level.
DisplacementField sobolev_gradient(const Mesh& mesh, const FeSpacePair& spaces,
                                   const PhysicsCase& cs, const ComplexStokesField& state,
                                   const ComplexStokesField& adjoint,
                                   const CurvatureField& curv);

// Scalar boundary density for visualization: dJ lumped against Sigma hat
// functions, projected on the normal and divided by arclength weights.
Eigen::VectorXd shape_gradient_density(const Mesh& mesh, const Eigen::VectorXd& functional);

// Central finite-difference validation on one mesh family (frozen
// connectivity, nodes moved by +-t theta).
ShapeDerivativeReport fd_gradient_check(const Mesh& mesh, const PhysicsCase& cs,
                                        const DisplacementField& theta,
                                        const std::vector<double>& t_ladder,
                                        double c_N = 1e-8);

void write_report_csv(const ShapeDerivativeReport& report, const std::string& path);

}  // namespace ccbm
