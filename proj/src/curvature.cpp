#include "ccbm/curvature.hpp"

#include <Eigen/SparseCholesky>

#include "ccbm/errors.hpp"
#include "ccbm/fields.hpp"
#include "ccbm/quadrature.hpp"

namespace ccbm {

CurvatureField curvature(const Mesh& mesh, const FeSpacePair& spaces, double c_N) {
  if (!(c_N > 0.0)) throw ValidationError("c_N must be positive");
  const int nv = spaces.n_vertices;
  const int n = 2 * nv;

  std::vector<Eigen::Triplet<double>> trips;
  // c_N * P1 vector stiffness (components decouple).
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, spaces, t);
    const Eigen::Vector2d g[3] = {em.jac_inv_t * Eigen::Vector2d(-1, -1),
                                  em.jac_inv_t * Eigen::Vector2d(1, 0),
                                  em.jac_inv_t * Eigen::Vector2d(0, 1)};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double k = c_N * em.area * g[a].dot(g[b]);
        for (int c = 0; c < 2; ++c)
          trips.emplace_back(2 * em.pnode[a] + c, 2 * em.pnode[b] + c, k);
      }
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const BoundaryGeometry geom = boundary_geometry(mesh);
  for (int be = 0; be < static_cast<int>(mesh.boundary_edges.size()); ++be) {
    const auto& e = mesh.boundary_edges[be];
    if (e.label != BoundaryLabel::SigmaFree) continue;
    const double ell = geom.edge_length[be];
    // Consistent P1 edge mass.
    const double m11 = ell / 3.0, m12 = ell / 6.0;
    for (int c = 0; c < 2; ++c) {
      trips.emplace_back(2 * e.a + c, 2 * e.a + c, m11);
      trips.emplace_back(2 * e.b + c, 2 * e.b + c, m11);
      trips.emplace_back(2 * e.a + c, 2 * e.b + c, m12);
      trips.emplace_back(2 * e.b + c, 2 * e.a + c, m12);
    }
    const Vec2 na = geom.node_normal[e.a], nb = geom.node_normal[e.b];
    for (const auto& q : edge_rule()) {
      const double w = q.w * ell;
      const Vec2 nq = (1.0 - q.s) * na + q.s * nb;
      for (int c = 0; c < 2; ++c) {
        rhs[2 * e.a + c] += w * (1.0 - q.s) * nq[c];
        rhs[2 * e.b + c] += w * q.s * nq[c];
      }
    }
  }

  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success)
    throw SingularMatrixError("curvature extension system failed to factorize");
  CurvatureField cf;
  cf.extension = solver.solve(rhs);

  // kappa = div N holds for a unitary extension only; the smoothed extension
  // decays away from Sigma, which would bias the divergence by O(1). Taking
  // the divergence of the nodally renormalized field removes the bias.
  Eigen::VectorXd unit = cf.extension;
  for (int v = 0; v < nv; ++v) {
    const double norm = std::hypot(unit[2 * v], unit[2 * v + 1]);
    if (norm > 1e-12) {
      unit[2 * v] /= norm;
      unit[2 * v + 1] /= norm;
    }
  }

  // Averaged over the node's triangle star with area weights.
  cf.kappa = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(nv);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, spaces, t);
    const double div = p1_vector_jacobian(em, unit).trace();
    for (int k = 0; k < 3; ++k) {
      cf.kappa[em.pnode[k]] += em.area * div;
      wsum[em.pnode[k]] += em.area;
    }
  }
  for (int v = 0; v < nv; ++v)
    if (wsum[v] > 0.0) cf.kappa[v] /= wsum[v];
  return cf;
}

}  // namespace ccbm
