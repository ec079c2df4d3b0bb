#include "ccbm/assembly.hpp"

#include <cmath>

#include "ccbm/quadrature.hpp"
#include "ccbm/solve.hpp"

namespace ccbm {

namespace {

template <typename Scalar>
using Trip = Eigen::Triplet<Scalar>;

bool finite(double x) { return std::isfinite(x); }
bool finite(cdouble x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); }

// alpha * vector stiffness and the divergence blocks, on full DOF indices
// (velocity dof = 2*vnode + c, pressure dof = p_offset + vertex).
template <typename Scalar>
void add_stokes_volume(const Mesh& mesh, const FeSpacePair& sp, double alpha,
                       int p_offset, std::vector<Trip<Scalar>>& trips) {
  const auto& rule = triangle_rule();
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, sp, t);
    double K[6][6] = {};
    double B[3][6][2] = {};
    for (const auto& q : rule) {
      const double w = q.w * em.area;
      Eigen::Vector2d G[6];
      p2_shape_grad(q.l0, q.l1, q.l2, G);
      Eigen::Vector2d g[6];
      for (int a = 0; a < 6; ++a) g[a] = em.jac_inv_t * G[a];
      const double P[3] = {q.l0, q.l1, q.l2};
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) K[a][b] += w * g[a].dot(g[b]);
      for (int m = 0; m < 3; ++m)
        for (int b = 0; b < 6; ++b)
          for (int c = 0; c < 2; ++c) B[m][b][c] -= w * P[m] * g[b][c];
    }
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 2; ++c)
          trips.emplace_back(2 * em.vnode[a] + c, 2 * em.vnode[b] + c,
                             Scalar(alpha * K[a][b]));
    for (int m = 0; m < 3; ++m)
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 2; ++c) {
          trips.emplace_back(p_offset + em.pnode[m], 2 * em.vnode[b] + c,
                             Scalar(B[m][b][c]));
          trips.emplace_back(2 * em.vnode[b] + c, p_offset + em.pnode[m],
                             Scalar(B[m][b][c]));
        }
  }
}

// coeff * int_Sigma (phi.n)(psi.n) with the interpolated averaged normals.
void add_sigma_coupling(const Mesh& mesh, const FeSpacePair& sp, cdouble coeff,
                        std::vector<Trip<cdouble>>& trips) {
  for (int be = 0; be < static_cast<int>(mesh.boundary_edges.size()); ++be) {
    if (mesh.boundary_edges[be].label != BoundaryLabel::SigmaFree) continue;
    const EdgeFrame fr = EdgeFrame::sigma_edge(mesh, sp, be);
    const int nodes[3] = {fr.node_a, fr.node_m, fr.node_b};
    for (const auto& q : edge_rule()) {
      const double s = q.s, w = q.w * fr.ell;
      const double L[3] = {(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)};
      const Vec2 n = fr.n(s);
      for (int i = 0; i < 3; ++i)
        for (int ci = 0; ci < 2; ++ci)
          for (int j = 0; j < 3; ++j)
            for (int cj = 0; cj < 2; ++cj)
              trips.emplace_back(2 * nodes[i] + ci, 2 * nodes[j] + cj,
                                 coeff * (w * L[i] * L[j] * n[ci] * n[cj]));
    }
  }
}

template <typename Scalar, typename F>
void add_forcing(const Mesh& mesh, const FeSpacePair& sp, const F& f,
                 Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
  const auto& rule = triangle_rule();
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, sp, t);
    for (const auto& q : rule) {
      const double w = q.w * em.area;
      double N[6];
      p2_shape(q.l0, q.l1, q.l2, N);
      const Vec2 fv = f(em.map(q.l1, q.l2));
      if (!finite(fv.x()) || !finite(fv.y()))
        throw AssemblyError("forcing evaluated to a non-finite value");
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 2; ++c) b[2 * em.vnode[a] + c] += Scalar(w * N[a] * fv[c]);
    }
  }
}

// Symmetric elimination of the constrained velocity DOFs.
ComplexSparseSystem finalize(const FeSpacePair& sp, std::vector<Trip<cdouble>>& trips,
                             const Eigen::VectorXcd& b_full, const Eigen::VectorXcd& lift) {
  const int nvd = sp.velocity_dofs();
  const int np = sp.pressure_dofs();
  ComplexSparseSystem sys;
  sys.n_pressure = np;
  sys.lift = lift;
  sys.vdof_to_reduced.assign(nvd, 0);
  for (int d : sp.constrained_dofs) sys.vdof_to_reduced[d] = -1;
  int idx = 0;
  for (int d = 0; d < nvd; ++d)
    if (sys.vdof_to_reduced[d] == 0) sys.vdof_to_reduced[d] = idx++;
    else sys.vdof_to_reduced[d] = -1;
  sys.n_free_velocity = idx;

  auto reduced = [&](int full) {
    return full < nvd ? sys.vdof_to_reduced[full] : sys.n_free_velocity + (full - nvd);
  };
  const int n = sys.n_free_velocity + np;
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
  for (int d = 0; d < nvd; ++d)
    if (sys.vdof_to_reduced[d] >= 0) b[sys.vdof_to_reduced[d]] = b_full[d];
  for (int m = 0; m < np; ++m) b[sys.n_free_velocity + m] = b_full[nvd + m];

  std::vector<Trip<cdouble>> red;
  red.reserve(trips.size());
  for (const auto& tr : trips) {
    if (!finite(tr.value())) throw AssemblyError("non-finite matrix entry");
    const bool row_fixed = tr.row() < nvd && sys.vdof_to_reduced[tr.row()] < 0;
    const bool col_fixed = tr.col() < nvd && sys.vdof_to_reduced[tr.col()] < 0;
    if (row_fixed) continue;
    if (col_fixed) {
      b[reduced(tr.row())] -= tr.value() * lift[tr.col()];
      continue;
    }
    red.emplace_back(reduced(tr.row()), reduced(tr.col()), tr.value());
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(red.begin(), red.end());
  sys.b = b;
  return sys;
}

}  // namespace

EdgeFrame EdgeFrame::sigma_edge(const Mesh& mesh, const FeSpacePair& sp, int bedge) {
  const auto& be = mesh.boundary_edges[bedge];
  EdgeFrame fr;
  fr.node_a = be.a;
  fr.node_b = be.b;
  fr.node_m = sp.n_vertices + sp.boundary_edge_gedge[bedge];
  fr.tri = sp.boundary_edge_tri[bedge];
  fr.xa = mesh.nodes[be.a];
  const Vec2 d = mesh.nodes[be.b] - mesh.nodes[be.a];
  fr.ell = d.norm();
  fr.tau = d / fr.ell;
  fr.na = sp.sigma_vnode_normal[be.a];
  fr.nb = sp.sigma_vnode_normal[be.b];
  return fr;
}

ComplexSparseSystem assemble_state(const Mesh& mesh, const FeSpacePair& sp,
                                   const PhysicsCase& cs) {
  cs.check();
  const int nvd = sp.velocity_dofs();
  const int p_offset = nvd;
  std::vector<Trip<cdouble>> trips;
  add_stokes_volume<cdouble>(mesh, sp, cs.alpha, p_offset, trips);
  add_sigma_coupling(mesh, sp, cdouble(0.0, 1.0), trips);

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(nvd + sp.pressure_dofs());
  add_forcing<cdouble>(mesh, sp, cs.f, b);

  Eigen::VectorXcd lift = Eigen::VectorXcd::Zero(nvd);
  for (int d : sp.constrained_dofs) {
    const int vnode = d / 2, c = d % 2;
    const Vec2 gv = cs.g(sp.vnode_coord(mesh, vnode));
    if (!std::isfinite(gv[c])) throw AssemblyError("Dirichlet data is non-finite");
    lift[d] = gv[c];
  }
  return finalize(sp, trips, b, lift);
}

ComplexSparseSystem assemble_adjoint(const Mesh& mesh, const FeSpacePair& sp,
                                     double alpha, const Eigen::VectorXd& source_u_i,
                                     const Eigen::VectorXd& source_p_i) {
  const int nvd = sp.velocity_dofs();
  const int p_offset = nvd;
  std::vector<Trip<cdouble>> trips;
  add_stokes_volume<cdouble>(mesh, sp, alpha, p_offset, trips);
  add_sigma_coupling(mesh, sp, cdouble(0.0, -1.0), trips);

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(nvd + sp.pressure_dofs());
  const auto& rule = triangle_rule();
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, sp, t);
    for (const auto& q : rule) {
      const double w = q.w * em.area;
      double N[6];
      p2_shape(q.l0, q.l1, q.l2, N);
      const Eigen::Vector2d ui = eval_velocity(em, source_u_i, q.l0, q.l1, q.l2);
      const double pi = eval_pressure(em, source_p_i, q.l0, q.l1, q.l2);
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 2; ++c) b[2 * em.vnode[a] + c] += w * N[a] * ui[c];
      const double P[3] = {q.l0, q.l1, q.l2};
      for (int m = 0; m < 3; ++m) b[p_offset + em.pnode[m]] += w * P[m] * pi;
    }
  }
  const Eigen::VectorXcd lift = Eigen::VectorXcd::Zero(nvd);
  return finalize(sp, trips, b, lift);
}

ComplexStokesField scatter(const ComplexSparseSystem& sys, const Eigen::VectorXcd& x) {
  ComplexStokesField f;
  const int nvd = static_cast<int>(sys.vdof_to_reduced.size());
  f.u = sys.lift;
  for (int d = 0; d < nvd; ++d)
    if (sys.vdof_to_reduced[d] >= 0) f.u[d] = x[sys.vdof_to_reduced[d]];
  f.p = x.segment(sys.n_free_velocity, sys.n_pressure);
  return f;
}

Eigen::SparseMatrix<double> divergence_matrix(const Mesh& mesh, const FeSpacePair& sp) {
  std::vector<Trip<double>> trips;
  const auto& rule = triangle_rule();
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, sp, t);
    for (const auto& q : rule) {
      const double w = q.w * em.area;
      Eigen::Vector2d G[6];
      p2_shape_grad(q.l0, q.l1, q.l2, G);
      const double P[3] = {q.l0, q.l1, q.l2};
      for (int m = 0; m < 3; ++m)
        for (int b = 0; b < 6; ++b) {
          const Eigen::Vector2d g = em.jac_inv_t * G[b];
          for (int c = 0; c < 2; ++c)
            trips.emplace_back(em.pnode[m], 2 * em.vnode[b] + c, -w * P[m] * g[c]);
        }
    }
  }
  Eigen::SparseMatrix<double> B(sp.pressure_dofs(), sp.velocity_dofs());
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

RealStokesSolution solve_real_stokes(const Mesh& mesh, const FeSpacePair& sp,
                                     const RealStokesOptions& opt) {
  const int nvd = sp.velocity_dofs();
  const int np = sp.pressure_dofs();
  const int n_extra = opt.fix_sigma_pressure_mean ? 1 : 0;
  const int N = nvd + np + n_extra;

  std::vector<Trip<double>> trips;
  add_stokes_volume<double>(mesh, sp, opt.alpha, nvd, trips);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  if (opt.f) {
    Eigen::VectorXd bf = Eigen::VectorXd::Zero(nvd + np);
    add_forcing<double>(mesh, sp, opt.f, bf);
    b.head(nvd + np) = bf;
  }

  if (opt.sigma_load) {
    for (int be = 0; be < static_cast<int>(mesh.boundary_edges.size()); ++be) {
      if (mesh.boundary_edges[be].label != BoundaryLabel::SigmaFree) continue;
      const EdgeFrame fr = EdgeFrame::sigma_edge(mesh, sp, be);
      const int nodes[3] = {fr.node_a, fr.node_m, fr.node_b};
      for (const auto& q : edge_rule()) {
        const double s = q.s, w = q.w * fr.ell;
        const double L[3] = {(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)};
        const Vec2 load = opt.sigma_load(be, s, fr.x(s), fr.n(s));
        for (int i = 0; i < 3; ++i)
          for (int c = 0; c < 2; ++c) b[2 * nodes[i] + c] += w * L[i] * load[c];
      }
    }
  }

  if (opt.fix_sigma_pressure_mean) {
    const BoundaryGeometry geom = boundary_geometry(mesh);
    for (int v = 0; v < sp.n_vertices; ++v)
      if (geom.on_sigma[v]) {
        trips.emplace_back(N - 1, nvd + v, geom.node_weight[v]);
        trips.emplace_back(nvd + v, N - 1, geom.node_weight[v]);
      }
  }

  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(trips.begin(), trips.end());

  // Rotate Sigma velocity nodes into (normal, tangent) frames so the slip
  // constraint becomes a plain DOF elimination.
  Eigen::SparseMatrix<double> T(N, N);
  if (opt.slip_on_sigma) {
    std::vector<Trip<double>> tt;
    for (int vn = 0; vn < sp.velocity_nodes(); ++vn) {
      if (sp.vnode_on_sigma[vn]) {
        const Vec2 n = sp.sigma_vnode_normal[vn];
        const Vec2 tau(-n.y(), n.x());
        tt.emplace_back(2 * vn, 2 * vn, n.x());
        tt.emplace_back(2 * vn + 1, 2 * vn, n.y());
        tt.emplace_back(2 * vn, 2 * vn + 1, tau.x());
        tt.emplace_back(2 * vn + 1, 2 * vn + 1, tau.y());
      } else {
        tt.emplace_back(2 * vn, 2 * vn, 1.0);
        tt.emplace_back(2 * vn + 1, 2 * vn + 1, 1.0);
      }
    }
    for (int k = nvd; k < N; ++k) tt.emplace_back(k, k, 1.0);
    T.setFromTriplets(tt.begin(), tt.end());
    A = (T.transpose() * A * T).eval();
    b = T.transpose() * b;
  }

  // Constraints in (possibly rotated) coordinates.
  std::vector<char> fixed(N, 0);
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(N);
  for (int d : sp.constrained_dofs) {
    fixed[d] = 1;
    if (opt.g) {
      const Vec2 gv = opt.g(sp.vnode_coord(mesh, d / 2));
      lift[d] = gv[d % 2];
    }
  }
  if (opt.slip_on_sigma)
    for (int vn = 0; vn < sp.velocity_nodes(); ++vn)
      if (sp.vnode_on_sigma[vn]) fixed[2 * vn] = 1;  // normal component

  std::vector<int> red(N, -1);
  int idx = 0;
  for (int d = 0; d < N; ++d)
    if (!fixed[d]) red[d] = idx++;
  Eigen::VectorXd br = Eigen::VectorXd::Zero(idx);
  for (int d = 0; d < N; ++d)
    if (red[d] >= 0) br[red[d]] = b[d];
  std::vector<Trip<double>> rt;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (fixed[it.row()]) continue;
      if (fixed[it.col()]) {
        br[red[it.row()]] -= it.value() * lift[it.col()];
        continue;
      }
      rt.emplace_back(red[it.row()], red[it.col()], it.value());
    }
  Eigen::SparseMatrix<double> Ar(idx, idx);
  Ar.setFromTriplets(rt.begin(), rt.end());
  const Eigen::VectorXd xr = solve_real(Ar, br);

  Eigen::VectorXd w = lift;
  for (int d = 0; d < N; ++d)
    if (red[d] >= 0) w[d] = xr[red[d]];
  if (opt.slip_on_sigma) w = T * w;

  RealStokesSolution sol;
  sol.u = w.head(nvd);
  sol.p = w.segment(nvd, np);
  return sol;
}

}  // namespace ccbm
