#include "ccbm/spaces.hpp"

#include <algorithm>
#include <map>

namespace ccbm {

FeSpacePair build_spaces(const Mesh& mesh) {
  FeSpacePair sp;
  sp.n_vertices = static_cast<int>(mesh.nodes.size());

  std::map<std::pair<int, int>, int> edge_id;
  auto get_edge = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = edge_id.find(key);
    if (it != edge_id.end()) return it->second;
    sp.edges.push_back({key.first, key.second});
    edge_id[key] = static_cast<int>(sp.edges.size()) - 1;
    return edge_id[key];
  };
  sp.tri_edges.resize(mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int k = 0; k < 3; ++k)
      sp.tri_edges[t][k] = get_edge(mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3]);
  sp.n_edges = static_cast<int>(sp.edges.size());

  const int nvn = sp.velocity_nodes();
  sp.vnode_on_sigma.assign(nvn, 0);
  sp.vnode_on_gamma.assign(nvn, 0);
  sp.sigma_vnode_normal.assign(nvn, Vec2::Zero());

  // Adjacent triangle of each boundary edge (validated to be unique).
  std::map<std::pair<int, int>, int> tri_of_edge;
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int k = 0; k < 3; ++k) {
      const auto key = std::minmax(mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3]);
      tri_of_edge[key] = static_cast<int>(t);
    }

  const BoundaryGeometry geom = boundary_geometry(mesh);
  sp.boundary_edge_tri.resize(mesh.boundary_edges.size());
  sp.boundary_edge_gedge.resize(mesh.boundary_edges.size());
  for (size_t be = 0; be < mesh.boundary_edges.size(); ++be) {
    const auto& e = mesh.boundary_edges[be];
    const int ge = get_edge(e.a, e.b);
    sp.boundary_edge_gedge[be] = ge;
    sp.boundary_edge_tri[be] = tri_of_edge.at(std::minmax(e.a, e.b));
    const int mid = sp.n_vertices + ge;
    if (e.label == BoundaryLabel::SigmaFree) {
      sp.vnode_on_sigma[e.a] = sp.vnode_on_sigma[e.b] = sp.vnode_on_sigma[mid] = 1;
      sp.sigma_vnode_normal[e.a] = geom.node_normal[e.a];
      sp.sigma_vnode_normal[e.b] = geom.node_normal[e.b];
      Vec2 nm = 0.5 * (geom.node_normal[e.a] + geom.node_normal[e.b]);
      sp.sigma_vnode_normal[mid] = nm.normalized();
    } else {
      sp.vnode_on_gamma[e.a] = sp.vnode_on_gamma[e.b] = sp.vnode_on_gamma[mid] = 1;
    }
  }

  for (int vn = 0; vn < nvn; ++vn)
    if (sp.vnode_on_gamma[vn]) {
      sp.constrained_dofs.push_back(2 * vn);
      sp.constrained_dofs.push_back(2 * vn + 1);
    }
  return sp;
}

ElementMap element_map(const Mesh& mesh, const FeSpacePair& spaces, int tri) {
  ElementMap em;
  const auto& t = mesh.triangles[tri];
  em.pnode = {t[0], t[1], t[2]};
  for (int k = 0; k < 3; ++k) em.vnode[k] = t[k];
  for (int k = 0; k < 3; ++k) em.vnode[3 + k] = spaces.n_vertices + spaces.tri_edges[tri][k];
  em.p0 = mesh.nodes[t[0]];
  em.jac.col(0) = mesh.nodes[t[1]] - em.p0;
  em.jac.col(1) = mesh.nodes[t[2]] - em.p0;
  const double det = em.jac.determinant();
  em.area = 0.5 * det;
  em.jac_inv_t = em.jac.inverse().transpose();
  return em;
}

}  // namespace ccbm
