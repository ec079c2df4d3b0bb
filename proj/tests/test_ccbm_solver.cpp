#include <doctest.h>

#include "ccbm/quadrature.hpp"
#include "ccbm/state_solver.hpp"
#include "test_helpers.hpp"

using namespace ccbm;
using namespace ccbm::testing;

namespace {

struct AnnulusErrors {
  double max_u = 0.0;
  double max_u_i = 0.0;
  double max_p_i = 0.0;
  double max_p_r_err = 0.0;  // against 5(1 - r^2)
};

AnnulusErrors annulus_errors(const Mesh& mesh, const FeSpacePair& sp,
                             const ComplexStokesField& f) {
  AnnulusErrors e;
  e.max_u = f.max_abs_u();
  e.max_u_i = f.max_abs_u_imag();
  e.max_p_i = f.max_abs_p_imag();
  for (int v = 0; v < sp.n_vertices; ++v) {
    const double r = mesh.nodes[v].norm();
    e.max_p_r_err = std::max(e.max_p_r_err, std::abs(f.p[v].real() - 5.0 * (1.0 - r * r)));
  }
  return e;
}

// L2(Sigma) norms of the overdetermined-condition residuals of the real part.
std::pair<double, double> robin_residuals(const Mesh& mesh, const FeSpacePair& sp,
                                          double alpha, const ComplexStokesField& f) {
  const Eigen::VectorXd ur = f.u.real();
  const Eigen::VectorXd pr = f.p.real();
  double traction_sq = 0.0, slip_sq = 0.0;
  for (int be = 0; be < static_cast<int>(mesh.boundary_edges.size()); ++be) {
    if (mesh.boundary_edges[be].label != BoundaryLabel::SigmaFree) continue;
    const EdgeFrame fr = EdgeFrame::sigma_edge(mesh, sp, be);
    const auto& edge = mesh.boundary_edges[be];
    const ElementMap em = element_map(mesh, sp, fr.tri);
    for (const auto& q : edge_rule()) {
      const double w = q.w * fr.ell;
      double l[3] = {0, 0, 0};
      for (int k = 0; k < 3; ++k) {
        if (mesh.triangles[fr.tri][k] == edge.a) l[k] += 1.0 - q.s;
        if (mesh.triangles[fr.tri][k] == edge.b) l[k] += q.s;
      }
      const Vec2 n = fr.n(q.s);
      const Eigen::Matrix2d ju = velocity_jacobian(em, ur, l[0], l[1], l[2]);
      const double pv = fr.pres(pr, q.s);
      traction_sq += w * (-pv * n + alpha * ju * n).squaredNorm();
      slip_sq += w * std::pow(fr.vel(ur, q.s).dot(n), 2);
    }
  }
  return {std::sqrt(traction_sq), std::sqrt(slip_sq)};
}

}  // namespace

TEST_CASE("resting-fluid closed form on concentric annuli") {
  const PhysicsCase cs = gravity_case();
  const Mesh coarse = generate_annulus(0.4, CurveSpec::circle(1.0), 27, 63);
  const FeSpacePair csp = build_spaces(coarse);
  const AnnulusErrors ce = annulus_errors(coarse, csp, solve_state(coarse, csp, cs));

  const Mesh fine = generate_annulus(0.4, CurveSpec::circle(1.0), 54, 126);
  const FeSpacePair fsp = build_spaces(fine);
  const AnnulusErrors fe = annulus_errors(fine, fsp, solve_state(fine, fsp, cs));

  // Sane magnitudes at h ~ 0.1 and strict decrease under refinement.
  CHECK(ce.max_u < 2e-2);
  CHECK(ce.max_u_i < 5e-3);
  CHECK(ce.max_p_i < 5e-3);
  CHECK(ce.max_p_r_err < 5e-2);
  CHECK(fe.max_u < ce.max_u);
  CHECK(fe.max_u_i < ce.max_u_i);
  CHECK(fe.max_p_i < ce.max_p_i);
  CHECK(fe.max_p_r_err < ce.max_p_r_err);
}

TEST_CASE("zero data means zero fields everywhere") {
  const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 12, 28);
  const FeSpacePair sp = build_spaces(mesh);
  PhysicsCase cs = gravity_case();
  cs.f = [](const Vec2&) { return Vec2::Zero(); };
  const ComplexStokesField state = solve_state(mesh, sp, cs);
  CHECK(state.u.norm() == 0.0);
  const ComplexStokesField adj = solve_adjoint(mesh, sp, cs, state);
  CHECK(adj.u.norm() == 0.0);
  CHECK(adj.p.norm() == 0.0);
  const AuxiliaryStates aux = solve_auxiliary_states(mesh, sp, cs);
  CHECK(aux.u_D.u.norm() == 0.0);
  CHECK(aux.u_N.u.norm() == 0.0);
  const Diagnostics d = diagnostics(mesh, sp, cs, state, adj, aux);
  CHECK(d.J == 0.0);
  CHECK(d.J_KV == 0.0);
  CHECK(d.J_D == 0.0);
  CHECK(d.J_N == 0.0);
}

TEST_CASE("ellipse start has strictly positive costs") {
  const Mesh mesh = generate_annulus(0.4, CurveSpec::ellipse(1.0, 1.1), 30, 70);
  const FeSpacePair sp = build_spaces(mesh);
  const PhysicsCase cs = gravity_case();
  const ComplexStokesField state = solve_state(mesh, sp, cs);
  const ComplexStokesField adj = solve_adjoint(mesh, sp, cs, state);
  const AuxiliaryStates aux = solve_auxiliary_states(mesh, sp, cs);
  const Diagnostics d = diagnostics(mesh, sp, cs, state, adj, aux);
  CHECK(d.J > 1e-3);
  CHECK(std::isfinite(d.J));
  CHECK(d.max_abs_u_i > 1e-3);
  CHECK(d.max_abs_p_i > 1e-2);
  CHECK(d.J_KV > 1e-6);
  CHECK(d.J_D > 1e-3);  // u_N.n != 0 somewhere on Sigma
  CHECK(d.J_N > 1e-6);
}

TEST_CASE("adjoint is linear in its sources") {
  const Mesh mesh = generate_annulus(0.4, CurveSpec::ellipse(1.0, 1.1), 16, 40);
  const FeSpacePair sp = build_spaces(mesh);
  const PhysicsCase cs = gravity_case();
  const ComplexStokesField state = solve_state(mesh, sp, cs);

  ComplexStokesField doubled = state;
  // Double only the imaginary parts (the adjoint sources).
  doubled.u = state.u.real() + cdouble(0, 2) * state.u.imag();
  doubled.p = state.p.real() + cdouble(0, 2) * state.p.imag();

  const ComplexStokesField a1 = solve_adjoint(mesh, sp, cs, state);
  const ComplexStokesField a2 = solve_adjoint(mesh, sp, cs, doubled);
  CHECK((a2.u - 2.0 * a1.u).norm() <= 1e-9 * a1.u.norm());
  CHECK((a2.p - 2.0 * a1.p).norm() <= 1e-9 * a1.p.norm());
}

TEST_CASE("cost functional quadrature") {
  const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 16, 40);
  const FeSpacePair sp = build_spaces(mesh);

  ComplexStokesField f;
  f.u = Eigen::VectorXcd::Zero(sp.velocity_dofs());
  f.p = Eigen::VectorXcd::Zero(sp.pressure_dofs());
  CHECK(cost_J(mesh, sp, f) == 0.0);

  // u_i = (1,0) constant: J = area/2 by exact quadrature.
  for (int vn = 0; vn < sp.velocity_nodes(); ++vn) f.u[2 * vn] = cdouble(0.0, 1.0);
  double area = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
    area += mesh.signed_area(t);
  CHECK(cost_J(mesh, sp, f) == doctest::Approx(0.5 * area).epsilon(1e-13));
}

TEST_CASE("auxiliary states on the optimal annulus") {
  const PhysicsCase cs = gravity_case();
  const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 40, 96);
  const FeSpacePair sp = build_spaces(mesh);
  const AuxiliaryStates aux = solve_auxiliary_states(mesh, sp, cs);

  // Both velocities vanish up to the discretization floor.
  CHECK(aux.u_D.u.cwiseAbs().maxCoeff() < 5e-3);
  CHECK(aux.u_N.u.cwiseAbs().maxCoeff() < 5e-3);
  // p_D - p_N is a constant lambda_0 up to the floor.
  const auto [mean, sd] = pressure_shift_stats(aux);
  (void)mean;
  CHECK(sd < 1e-3);
  // The slip constraint holds exactly at Sigma nodes.
  for (int vn = 0; vn < sp.velocity_nodes(); ++vn)
    if (sp.vnode_on_sigma[vn]) {
      const Vec2 u(aux.u_D.u[2 * vn], aux.u_D.u[2 * vn + 1]);
      CHECK(std::abs(u.dot(sp.sigma_vnode_normal[vn])) <= 1e-12 * (1.0 + u.norm()));
    }
  // The u_D pressure constant is pinned by a zero Sigma mean.
  const BoundaryGeometry geom = boundary_geometry(mesh);
  double pmean = 0.0;
  for (int v = 0; v < sp.n_vertices; ++v)
    if (geom.on_sigma[v]) pmean += geom.node_weight[v] * aux.u_D.p[v];
  CHECK(std::abs(pmean) <= 1e-9);
}

TEST_CASE("classical costs sit at a decreasing floor on optimal annuli") {
  const PhysicsCase cs = gravity_case();
  double prev[3] = {0, 0, 0};
  int level = 0;
  for (int n : {70, 140}) {
    const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), n * 3 / 7, n);
    const FeSpacePair sp = build_spaces(mesh);
    const ComplexStokesField st = solve_state(mesh, sp, cs);
    const ComplexStokesField ad = solve_adjoint(mesh, sp, cs, st);
    const AuxiliaryStates aux = solve_auxiliary_states(mesh, sp, cs);
    const Diagnostics d = diagnostics(mesh, sp, cs, st, ad, aux);
    if (level == 1) {
      CHECK(d.J_KV < prev[0]);
      CHECK(d.J_D < prev[1]);
      CHECK(d.J_N < prev[2]);
    }
    prev[0] = d.J_KV;
    prev[1] = d.J_D;
    prev[2] = d.J_N;
    CHECK(d.J_KV < 1e-4);
    CHECK(d.J_D < 1e-4);
    CHECK(d.J_N < 1e-4);
    ++level;
  }
}

TEST_CASE("Robin residuals of the real part scale with eps + h^2") {
  const PhysicsCase cs = gravity_case();
  const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 40, 96);
  const FeSpacePair sp = build_spaces(mesh);
  const ComplexStokesField f = solve_state(mesh, sp, cs);
  const double eps = std::max(f.max_abs_u_imag(), f.max_abs_p_imag());
  const double h = 2.0 * M_PI / 96.0;
  const auto [traction, slip] = robin_residuals(mesh, sp, cs.alpha, f);
  CHECK(traction <= 10.0 * (eps + h * h));
  CHECK(slip <= 10.0 * (eps + h * h));
}

TEST_CASE("costs are invariant under rigid rotation") {
  const double phi = 0.7;
  const Eigen::Matrix2d Rm = Eigen::Rotation2D<double>(phi).toRotationMatrix();

  const Mesh mesh = generate_annulus(0.4, CurveSpec::ellipse(1.0, 1.1), 20, 48);
  Mesh rotated = mesh;
  for (Vec2& p : rotated.nodes) p = Rm * p;

  const PhysicsCase cs = gravity_case();
  PhysicsCase crot = cs;
  crot.f = [Rm, f = cs.f](const Vec2& x) { return (Rm * f(Rm.transpose() * x)).eval(); };
  crot.g = [Rm, g = cs.g](const Vec2& x) { return (Rm * g(Rm.transpose() * x)).eval(); };

  auto run_diag = [](const Mesh& m, const PhysicsCase& c) {
    const FeSpacePair sp = build_spaces(m);
    const ComplexStokesField st = solve_state(m, sp, c);
    const ComplexStokesField ad = solve_adjoint(m, sp, c, st);
    const AuxiliaryStates aux = solve_auxiliary_states(m, sp, c);
    return diagnostics(m, sp, c, st, ad, aux);
  };
  const Diagnostics d1 = run_diag(mesh, cs);
  const Diagnostics d2 = run_diag(rotated, crot);
  CHECK(d2.J == doctest::Approx(d1.J).epsilon(1e-9));
  CHECK(d2.J_KV == doctest::Approx(d1.J_KV).epsilon(1e-9));
  CHECK(d2.J_D == doctest::Approx(d1.J_D).epsilon(1e-9));
  CHECK(d2.J_N == doctest::Approx(d1.J_N).epsilon(1e-9));
}
