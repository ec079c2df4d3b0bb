#include "ccbm/shape_derivative.hpp"

#include <Eigen/SparseCholesky>
#include <fstream>

#include "ccbm/quadrature.hpp"
#include "ccbm/solve.hpp"
#include "ccbm/state_solver.hpp"

namespace ccbm {

namespace {

cdouble cdot(const Vec2c& a, const Vec2c& b_conj) {
  return a.x() * std::conj(b_conj.x()) + a.y() * std::conj(b_conj.y());
}

cdouble ndot(const Vec2& n, const Vec2c& v_conj) {
  return n.x() * std::conj(v_conj.x()) + n.y() * std::conj(v_conj.y());
}

// Everything the boundary kernel needs at one Sigma quadrature point.
struct SigmaPointData {
  double w = 0.0;  // quadrature weight including edge length
  Vec2 x, n, dn_ds, tau;
  double kappa = 0.0;
  Vec2 f;
  Vec2c u, du_ds, v, dv_ds;
  cdouble p, dp_ds;
  double ui_sq_pi_sq = 0.0;  // |u_i|^2 + |p_i|^2 at the point
};

template <typename Fn>
void for_each_sigma_point(const Mesh& mesh, const FeSpacePair& sp, const PhysicsCase& cs,
                          const ComplexStokesField& state, const ComplexStokesField& adjoint,
                          const CurvatureField* curv, const Fn& fn) {
  for (int be = 0; be < static_cast<int>(mesh.boundary_edges.size()); ++be) {
    if (mesh.boundary_edges[be].label != BoundaryLabel::SigmaFree) continue;
    const EdgeFrame fr = EdgeFrame::sigma_edge(mesh, sp, be);
    const int a = mesh.boundary_edges[be].a, b = mesh.boundary_edges[be].b;
    for (const auto& q : edge_rule()) {
      SigmaPointData d;
      d.w = q.w * fr.ell;
      d.x = fr.x(q.s);
      d.n = fr.n(q.s);
      d.dn_ds = fr.dn_ds();
      d.tau = fr.tau;
      d.kappa = curv ? (1.0 - q.s) * curv->kappa[a] + q.s * curv->kappa[b] : 0.0;
      d.f = cs.f(d.x);
      d.u = fr.vel(state.u, q.s);
      d.du_ds = fr.dvel_ds(state.u, q.s);
      d.v = fr.vel(adjoint.u, q.s);
      d.dv_ds = fr.dvel_ds(adjoint.u, q.s);
      d.p = fr.pres(state.p, q.s);
      d.dp_ds = fr.dpres_ds(state.p);
      d.ui_sq_pi_sq = d.u.imag().squaredNorm() + std::pow(d.p.imag(), 2);
      fn(fr, q.s, d);
    }
  }
}

}  // namespace

Eigen::VectorXd shape_derivative_boundary_functional(
    const Mesh& mesh, const FeSpacePair& sp, const PhysicsCase& cs,
    const ComplexStokesField& state, const ComplexStokesField& adjoint,
    const CurvatureField& curv) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * sp.n_vertices);

  for_each_sigma_point(
      mesh, sp, cs, state, adjoint, &curv,
      [&](const EdgeFrame& fr, double s, const SigmaPointData& d) {
        // The normal trace Vn is discretized as the piecewise-linear
        // interpolant of its nodal values theta.n_hat, so the functional
        // factors exactly through Vn (Hadamard structure at the discrete
        // level). Test dof (i,c) induces W(s) = L_i(s) * n_hat_i[c].
        const int nodes[2] = {fr.node_a, fr.node_b};
        const Vec2 nhat[2] = {fr.na, fr.nb};
        const double L[2] = {1.0 - s, s};
        const double dL[2] = {-1.0 / fr.ell, 1.0 / fr.ell};
        const cdouble u_dot_n = d.u.x() * d.n.x() + d.u.y() * d.n.y();
        const cdouble u_dot_tau = d.u.x() * d.tau.x() + d.u.y() * d.tau.y();
        const cdouble du_ds_dot_tau = d.du_ds.x() * d.tau.x() + d.du_ds.y() * d.tau.y();
        const cdouble n_vbar = ndot(d.n, d.v);
        const cdouble tau_vbar =
            d.tau.x() * std::conj(d.v.x()) + d.tau.y() * std::conj(d.v.y());
        const cdouble f_vbar = d.f.x() * std::conj(d.v.x()) + d.f.y() * std::conj(d.v.y());
        const cdouble visc = d.du_ds.x() * std::conj(d.dv_ds.x()) +
                             d.du_ds.y() * std::conj(d.dv_ds.y());
        const cdouble iu(0.0, 1.0);

        for (int i = 0; i < 2; ++i)
          for (int c = 0; c < 2; ++c) {
            const double W = L[i] * nhat[i][c];
            const double dW_ds = dL[i] * nhat[i][c];

            cdouble z = 0.0;
            z += f_vbar * W;                                       // f Vn . vbar
            z -= (d.dp_ds * W + d.p * dW_ds) * tau_vbar;           // -grad_S(p Vn) . vbar
            z -= cs.alpha * W * visc;                              // viscous, by parts
            z += iu * (dW_ds * u_dot_tau + W * du_ds_dot_tau) * n_vbar;  // i div_S(Vn u) n
            z += iu * u_dot_n * dW_ds * tau_vbar;                  // i (u.n) grad_S Vn
            z -= d.kappa * (-d.p + iu * u_dot_n) * n_vbar * W;     // curvature terms

            r[2 * nodes[i] + c] += d.w * (z.imag() + 0.5 * d.ui_sq_pi_sq * W);
          }
      });
  return r;
}

double shape_derivative_boundary(const Mesh& mesh, const FeSpacePair& sp,
                                 const PhysicsCase& cs, const ComplexStokesField& state,
                                 const ComplexStokesField& adjoint, const CurvatureField& curv,
                                 const DisplacementField& theta) {
  const Eigen::VectorXd r =
      shape_derivative_boundary_functional(mesh, sp, cs, state, adjoint, curv);
  return r.dot(theta.values);
}

double shape_derivative_distributed(const Mesh& mesh, const FeSpacePair& sp,
                                    const PhysicsCase& cs, const ComplexStokesField& state,
                                    const ComplexStokesField& adjoint,
                                    const DisplacementField& theta) {
  if (!cs.f_jacobian)
    throw AssemblyError("distributed shape derivative needs the forcing Jacobian");

  const Eigen::VectorXd ui = state.u_imag();
  const Eigen::VectorXd pi = state.p_imag();
  double real_part = 0.0;
  cdouble z = 0.0;
  const cdouble iu(0.0, 1.0);

  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, sp, t);
    const Eigen::Matrix2d jt = p1_vector_jacobian(em, theta.values);  // (i,j) = dth_i/dx_j
    const double div_t = jt.trace();
    const Eigen::Matrix2d A =
        div_t * Eigen::Matrix2d::Identity() - jt - jt.transpose();
    const Eigen::Vector2d grad_pi = pressure_gradient(em, pi);

    for (const auto& q : triangle_rule()) {
      const double w = q.w * em.area;
      const Vec2 x = em.map(q.l1, q.l2);
      const Eigen::Vector2d th = p1_vector_at(em, theta.values, q.l0, q.l1, q.l2);

      const Eigen::Vector2d ui_v = eval_velocity(em, ui, q.l0, q.l1, q.l2);
      const Eigen::Matrix2d ui_jac = velocity_jacobian(em, ui, q.l0, q.l1, q.l2);
      const double pi_v = eval_pressure(em, pi, q.l0, q.l1, q.l2);
      real_part -= w * (ui_v.dot(ui_jac * th) + pi_v * th.dot(grad_pi));

      const Mat2c ju = velocity_jacobian(em, state.u, q.l0, q.l1, q.l2);
      const Mat2c jv = velocity_jacobian(em, adjoint.u, q.l0, q.l1, q.l2);
      const cdouble pv = eval_pressure(em, state.p, q.l0, q.l1, q.l2);
      const cdouble qv = eval_pressure(em, adjoint.p, q.l0, q.l1, q.l2);
      const Vec2c vv = eval_velocity(em, adjoint.u, q.l0, q.l1, q.l2);
      const Vec2 fv = cs.f(x);
      const Eigen::Matrix2d jf = cs.f_jacobian(x);

      // K1: -alpha A grad(u) : grad(vbar), componentwise A grad(u_j).grad(v_j)bar.
      for (int j = 0; j < 2; ++j) {
        const Vec2c gu = ju.row(j).transpose();
        const Vec2c gv = jv.row(j).transpose();
        const Vec2c agu = A.cast<cdouble>() * gu;
        z -= w * cs.alpha * (agu.x() * std::conj(gv.x()) + agu.y() * std::conj(gv.y()));
      }
      // K5 + K6: div(theta) p div(vbar) - p (Dtheta : grad vbar).
      z += w * div_t * pv * std::conj(jv.trace());
      z -= w * pv * (jt.cast<cdouble>() * jv.conjugate()).trace();
      // K7: [div(f x theta)] . vbar.
      const Eigen::Vector2d jf_th = jf * th;
      z += w * (cdouble(jf_th.x()) * std::conj(vv.x()) +
                cdouble(jf_th.y()) * std::conj(vv.y()));
      z += w * (fv.x() * std::conj(vv.x()) + fv.y() * std::conj(vv.y())) * div_t;
      // K8: -qbar (Dtheta : grad u).
      z -= w * std::conj(qv) * (jt.cast<cdouble>() * ju).trace();
    }
  }

  for_each_sigma_point(
      mesh, sp, cs, state, adjoint, nullptr,
      [&](const EdgeFrame& fr, double s, const SigmaPointData& d) {
        const Eigen::Vector2d th =
            (1.0 - s) * theta.at(fr.node_a) + s * theta.at(fr.node_b);
        const double Vn = th.dot(d.n);
        real_part += d.w * 0.5 * d.ui_sq_pi_sq * Vn;

        const ElementMap em = element_map(mesh, sp, fr.tri);
        const Eigen::Matrix2d jt = p1_vector_jacobian(em, theta.values);
        const double div_t = jt.trace();
        const cdouble u_dot_n = d.u.x() * d.n.x() + d.u.y() * d.n.y();
        const cdouble v_conj_n = ndot(d.n, d.v);
        // K2, K3, K4: derivative of the transported Robin term.
        z -= d.w * iu * (div_t + d.n.dot(jt * d.n)) * u_dot_n * v_conj_n;
        const Vec2c jt_u = jt.cast<cdouble>() * d.u;
        z += d.w * iu * (jt_u.x() * d.n.x() + jt_u.y() * d.n.y()) * v_conj_n;
        const Vec2c jt_vbar = jt.cast<cdouble>() * d.v.conjugate();
        z += d.w * iu * u_dot_n * (jt_vbar.x() * d.n.x() + jt_vbar.y() * d.n.y());
      });

  return real_part + z.imag();
}

double shape_derivative_boundary_second_form(const Mesh& mesh, const FeSpacePair& sp,
                                             const PhysicsCase& cs,
                                             const ComplexStokesField& state,
                                             const ComplexStokesField& adjoint,
                                             const DisplacementField& theta) {
  double total = 0.0;
  for_each_sigma_point(
      mesh, sp, cs, state, adjoint, nullptr,
      [&](const EdgeFrame& fr, double s, const SigmaPointData& d) {
        const double vn_a = theta.at(fr.node_a).dot(fr.na);
        const double vn_b = theta.at(fr.node_b).dot(fr.nb);
        const double Vn = (1.0 - s) * vn_a + s * vn_b;
        const double dVn_ds = (vn_b - vn_a) / fr.ell;

        const ElementMap em = element_map(mesh, sp, fr.tri);
        double l[3] = {0, 0, 0};
        for (int k = 0; k < 3; ++k) {
          if (mesh.triangles[fr.tri][k] == fr.node_a) l[k] += 1.0 - s;
          if (mesh.triangles[fr.tri][k] == fr.node_b) l[k] += s;
        }
        const Mat2c ju = velocity_jacobian(em, state.u, l[0], l[1], l[2]);
        const Vec2c grad_p = pressure_gradient(em, state.p);

        // Constant per-triangle Hessians of the quadratic velocity components.
        const Eigen::Vector2d gl[3] = {em.jac_inv_t * Eigen::Vector2d(-1, -1),
                                       em.jac_inv_t * Eigen::Vector2d(1, 0),
                                       em.jac_inv_t * Eigen::Vector2d(0, 1)};
        Mat2c hess[2] = {Mat2c::Zero(), Mat2c::Zero()};
        for (int c = 0; c < 2; ++c) {
          for (int k = 0; k < 3; ++k) {
            const cdouble cv = state.u[2 * em.vnode[k] + c];
            hess[c] += cv * 4.0 * (gl[k] * gl[k].transpose()).cast<cdouble>();
            const cdouble cm = state.u[2 * em.vnode[3 + k] + c];
            const Eigen::Matrix2d sym =
                gl[k] * gl[(k + 1) % 3].transpose() + gl[(k + 1) % 3] * gl[k].transpose();
            hess[c] += cm * 4.0 * sym.cast<cdouble>();
          }
        }

        const cdouble iu(0.0, 1.0);
        const cdouble u_dot_n = d.u.x() * d.n.x() + d.u.y() * d.n.y();
        const cdouble u_dot_tau = d.u.x() * d.tau.x() + d.u.y() * d.tau.y();
        const Vec2c dnu = ju * d.n.cast<cdouble>();        // normal derivative of u
        const cdouble dnu_dot_n = dnu.x() * d.n.x() + dnu.y() * d.n.y();
        const cdouble dnp = grad_p.x() * d.n.x() + grad_p.y() * d.n.y();
        Vec2c dnnu;
        for (int c = 0; c < 2; ++c)
          dnnu[c] = d.n.cast<cdouble>().dot(hess[c] * d.n.cast<cdouble>());

        // B2 = [alpha grad(u) + (i u.n - p) id] grad_S Vn
        //      - [-dp/dn n + alpha d2u/dn2 + i (du/dn . n) n] Vn
        //      + i (u . grad_S Vn) n.
        const Vec2c grad_s_vn = (dVn_ds * d.tau).cast<cdouble>();
        Vec2c B = cs.alpha * (ju.transpose() * grad_s_vn) + (iu * u_dot_n - d.p) * grad_s_vn;
        B -= (-dnp * d.n.cast<cdouble>() + cs.alpha * dnnu +
              iu * dnu_dot_n * d.n.cast<cdouble>()) * Vn;
        B += iu * (u_dot_tau * dVn_ds) * d.n.cast<cdouble>();

        const cdouble bz = B.x() * std::conj(d.v.x()) + B.y() * std::conj(d.v.y());
        total += d.w * (bz.imag() + 0.5 * d.ui_sq_pi_sq * Vn);
      });
  return total;
}

DisplacementField sobolev_gradient(const Mesh& mesh, const FeSpacePair& sp,
                                   const PhysicsCase& cs, const ComplexStokesField& state,
                                   const ComplexStokesField& adjoint,
                                   const CurvatureField& curv) {
  const Eigen::VectorXd r =
      shape_derivative_boundary_functional(mesh, sp, cs, state, adjoint, curv);

  const int nv = sp.n_vertices;
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, sp, t);
    const Eigen::Vector2d g[3] = {em.jac_inv_t * Eigen::Vector2d(-1, -1),
                                  em.jac_inv_t * Eigen::Vector2d(1, 0),
                                  em.jac_inv_t * Eigen::Vector2d(0, 1)};
    // P1 stiffness plus consistent mass, per component.
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double k = em.area * g[a].dot(g[b]);
        const double m = em.area * (a == b ? 1.0 / 6.0 : 1.0 / 12.0);
        for (int c = 0; c < 2; ++c)
          trips.emplace_back(2 * em.pnode[a] + c, 2 * em.pnode[b] + c, k + m);
      }
  }

  std::vector<char> fixed(2 * nv, 0);
  for (int v : mesh.boundary_nodes(BoundaryLabel::GammaFixed))
    fixed[2 * v] = fixed[2 * v + 1] = 1;
  std::vector<int> red(2 * nv, -1);
  int idx = 0;
  for (int d = 0; d < 2 * nv; ++d)
    if (!fixed[d]) red[d] = idx++;

  std::vector<Eigen::Triplet<double>> rt;
  for (const auto& tr : trips)
    if (!fixed[tr.row()] && !fixed[tr.col()])
      rt.emplace_back(red[tr.row()], red[tr.col()], tr.value());
  Eigen::SparseMatrix<double> H(idx, idx);
  H.setFromTriplets(rt.begin(), rt.end());
  Eigen::VectorXd rhs(idx);
  for (int d = 0; d < 2 * nv; ++d)
    if (red[d] >= 0) rhs[red[d]] = -r[d];

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(H);
  if (solver.info() != Eigen::Success)
    throw SingularMatrixError("H1 gradient system failed to factorize");
  const Eigen::VectorXd x = solver.solve(rhs);

  DisplacementField theta;
  theta.values = Eigen::VectorXd::Zero(2 * nv);
  for (int d = 0; d < 2 * nv; ++d)
    if (red[d] >= 0) theta.values[d] = x[red[d]];
  // |theta|_H1^2 = theta' H theta = -r . theta by the Riesz equation.
  const double nsq = std::max(0.0, -r.dot(theta.values));
  theta.h1_norm = std::sqrt(nsq);
  return theta;
}

Eigen::VectorXd shape_gradient_density(const Mesh& mesh, const Eigen::VectorXd& functional) {
  const BoundaryGeometry geom = boundary_geometry(mesh);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.nodes.size());
  for (size_t v = 0; v < mesh.nodes.size(); ++v)
    if (geom.on_sigma[v] && geom.node_weight[v] > 0.0)
      g[v] = (functional[2 * v] * geom.node_normal[v].x() +
              functional[2 * v + 1] * geom.node_normal[v].y()) /
             geom.node_weight[v];
  return g;
}

ShapeDerivativeReport fd_gradient_check(const Mesh& mesh, const PhysicsCase& cs,
                                        const DisplacementField& theta,
                                        const std::vector<double>& t_ladder, double c_N) {
  const FeSpacePair sp = build_spaces(mesh);
  const ComplexStokesField state = solve_state(mesh, sp, cs);
  const ComplexStokesField adjoint = solve_adjoint(mesh, sp, cs, state);
  const CurvatureField curv = curvature(mesh, sp, c_N);

  ShapeDerivativeReport rep;
  rep.dJ_boundary = shape_derivative_boundary(mesh, sp, cs, state, adjoint, curv, theta);
  rep.dJ_distributed = shape_derivative_distributed(mesh, sp, cs, state, adjoint, theta);

  auto J_at = [&](double t) {
    const Mesh m = deform(mesh, theta, t);
    const FeSpacePair s2 = build_spaces(m);
    return cost_J(m, s2, solve_state(m, s2, cs));
  };
  for (double t : t_ladder) {
    ShapeDerivativeReport::Row row;
    row.t = t;
    row.fd_quotient = (J_at(t) - J_at(-t)) / (2.0 * t);
    const double denom = std::max({std::abs(row.fd_quotient), std::abs(rep.dJ_boundary), 1e-300});
    row.err_boundary = std::abs(row.fd_quotient - rep.dJ_boundary) / denom;
    const double denom2 =
        std::max({std::abs(row.fd_quotient), std::abs(rep.dJ_distributed), 1e-300});
    row.err_distributed = std::abs(row.fd_quotient - rep.dJ_distributed) / denom2;
    rep.rows.push_back(row);
  }
  return rep;
}

void write_report_csv(const ShapeDerivativeReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "t,fd_quotient,err_boundary,err_distributed\n";
  out.precision(17);
  for (const auto& r : report.rows)
    out << r.t << "," << r.fd_quotient << "," << r.err_boundary << ","
        << r.err_distributed << "\n";
}

}  // namespace ccbm
