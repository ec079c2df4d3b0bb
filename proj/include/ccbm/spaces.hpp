#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "ccbm/mesh.hpp"

namespace ccbm {

// Taylor-Hood pair on a triangulation: continuous quadratic vector velocity
// (vertex + mid-edge nodes, 2 components) and continuous linear pressure
// (vertex nodes). Velocity DOF id = 2*vnode + component; vnode is a vertex
// id for vertices and n_vertices + edge id for midpoints.
struct FeSpacePair {
  int n_vertices = 0;
  int n_edges = 0;
  std::vector<std::array<int, 2>> edges;       // endpoints, sorted a < b
  std::vector<std::array<int, 3>> tri_edges;   // per triangle: global edge of local edge k
  // Local edge k of a triangle joins local vertices k and (k+1)%3.

  std::vector<int> constrained_dofs;           // Gamma velocity DOFs, sorted
  std::vector<char> vnode_on_sigma;            // size n_vertices + n_edges
  std::vector<char> vnode_on_gamma;
  std::vector<Vec2> sigma_vnode_normal;        // unit; valid where vnode_on_sigma
  std::vector<int> boundary_edge_tri;          // adjacent triangle per boundary edge
  std::vector<int> boundary_edge_gedge;        // global edge id per boundary edge

  int velocity_nodes() const { return n_vertices + n_edges; }
  int velocity_dofs() const { return 2 * velocity_nodes(); }
  int pressure_dofs() const { return n_vertices; }

  Vec2 vnode_coord(const Mesh& mesh, int vnode) const {
    if (vnode < n_vertices) return mesh.nodes[vnode];
    const auto& e = edges[vnode - n_vertices];
    return 0.5 * (mesh.nodes[e[0]] + mesh.nodes[e[1]]);
  }
};

FeSpacePair build_spaces(const Mesh& mesh);

// Quadratic Lagrange basis on the reference triangle, nodes ordered as
// (v0, v1, v2, m01, m12, m20).
inline void p2_shape(double l0, double l1, double l2, double N[6]) {
  N[0] = l0 * (2 * l0 - 1);
  N[1] = l1 * (2 * l1 - 1);
  N[2] = l2 * (2 * l2 - 1);
  N[3] = 4 * l0 * l1;
  N[4] = 4 * l1 * l2;
  N[5] = 4 * l2 * l0;
}

// Reference-coordinate gradients (d/dxi, d/deta) with l0 = 1-xi-eta, l1 = xi, l2 = eta.
inline void p2_shape_grad(double l0, double l1, double l2, Eigen::Vector2d G[6]) {
  const Eigen::Vector2d g0(-1, -1), g1(1, 0), g2(0, 1);
  G[0] = (4 * l0 - 1) * g0;
  G[1] = (4 * l1 - 1) * g1;
  G[2] = (4 * l2 - 1) * g2;
  G[3] = 4 * (l0 * g1 + l1 * g0);
  G[4] = 4 * (l1 * g2 + l2 * g1);
  G[5] = 4 * (l2 * g0 + l0 * g2);
}

// Per-triangle geometry and DOF bookkeeping used by assembly and evaluation.
struct ElementMap {
  std::array<int, 6> vnode;   // velocity nodes (v0,v1,v2,m01,m12,m20)
  std::array<int, 3> pnode;   // pressure nodes
  Eigen::Matrix2d jac;        // [p1-p0, p2-p0]
  Eigen::Matrix2d jac_inv_t;
  double area = 0.0;
  Vec2 p0;

  Vec2 map(double l1, double l2) const { return p0 + jac * Vec2(l1, l2); }
};

ElementMap element_map(const Mesh& mesh, const FeSpacePair& spaces, int tri);

}  // namespace ccbm
