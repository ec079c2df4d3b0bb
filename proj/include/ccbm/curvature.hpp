#pragma once

#include "ccbm/spaces.hpp"

namespace ccbm {

// Mean curvature of Sigma from the divergence of a smoothed unitary
// extension N of the outward normal: N solves
//   c_N int grad N : grad phi + int_Sigma N.phi = int_Sigma n.phi
// in the piecewise-linear vector space with no essential conditions, and
// kappa at a Sigma node is the area-weighted average of div N over the
// adjacent triangles.
struct CurvatureField {
  Eigen::VectorXd kappa;      // per mesh vertex; meaningful on Sigma nodes
  Eigen::VectorXd extension;  // N, interleaved over vertices
};

CurvatureField curvature(const Mesh& mesh, const FeSpacePair& spaces, double c_N = 1e-8);

}  // namespace ccbm
