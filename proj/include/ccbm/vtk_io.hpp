#pragma once

#include <string>

#include "ccbm/fields.hpp"

namespace ccbm {

struct VtkFields {
  const FeSpacePair* spaces = nullptr;
  const ComplexStokesField* state = nullptr;    // written as u_r, u_i, p_r, p_i
  const ComplexStokesField* adjoint = nullptr;  // written as v_r, v_i, q_r, q_i
  const Eigen::VectorXd* g_sigma = nullptr;     // per-vertex density, 0 off Sigma
};

// Legacy ASCII VTK 3.0 unstructured grid: triangles plus boundary line cells
// carrying an integer label field (0 triangles, 1 Gamma, 2 Sigma). Point data
// uses vertex values; coordinates print with 17 significant digits.
void export_vtk(const Mesh& mesh, const VtkFields& fields, const std::string& path);

// Minimal reader for round-trip checks: points, triangle cells, line cells
// with their labels.
Mesh read_vtk_mesh(const std::string& path);

}  // namespace ccbm
