#include "ccbm/state_solver.hpp"

#include <cmath>

#include "ccbm/quadrature.hpp"
#include "ccbm/solve.hpp"

namespace ccbm {

namespace {

// Barycentric coordinates within a triangle of the point at parameter s on
// the directed boundary edge (a, b).
void edge_barycentric(const Mesh& mesh, int tri, int a, int b, double s, double l[3]) {
  l[0] = l[1] = l[2] = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (mesh.triangles[tri][k] == a) l[k] += 1.0 - s;
    if (mesh.triangles[tri][k] == b) l[k] += s;
  }
}

}  // namespace

ComplexStokesField solve_state(const Mesh& mesh, const FeSpacePair& spaces,
                               const PhysicsCase& cs) {
  const ComplexSparseSystem sys = assemble_state(mesh, spaces, cs);
  return scatter(sys, solve(sys));
}

ComplexStokesField solve_adjoint(const Mesh& mesh, const FeSpacePair& spaces,
                                 const PhysicsCase& cs, const ComplexStokesField& state) {
  const ComplexSparseSystem sys =
      assemble_adjoint(mesh, spaces, cs.alpha, state.u_imag(), state.p_imag());
  return scatter(sys, solve(sys));
}

double cost_J(const Mesh& mesh, const FeSpacePair& spaces, const ComplexStokesField& state) {
  const Eigen::VectorXd ui = state.u_imag();
  const Eigen::VectorXd pi = state.p_imag();
  double J = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, spaces, t);
    for (const auto& q : triangle_rule()) {
      const Eigen::Vector2d uv = eval_velocity(em, ui, q.l0, q.l1, q.l2);
      const double pv = eval_pressure(em, pi, q.l0, q.l1, q.l2);
      J += 0.5 * q.w * em.area * (uv.squaredNorm() + pv * pv);
    }
  }
  return J;
}

AuxiliaryStates solve_auxiliary_states(const Mesh& mesh, const FeSpacePair& spaces,
                                       const PhysicsCase& cs) {
  cs.check();
  AuxiliaryStates aux;

  RealStokesOptions nopt;
  nopt.alpha = cs.alpha;
  nopt.f = cs.f;
  nopt.g = cs.g;
  aux.u_N = solve_real_stokes(mesh, spaces, nopt);

  RealStokesOptions dopt = nopt;
  dopt.slip_on_sigma = true;
  dopt.fix_sigma_pressure_mean = true;
  aux.u_D = solve_real_stokes(mesh, spaces, dopt);
  return aux;
}

Diagnostics diagnostics(const Mesh& mesh, const FeSpacePair& spaces, const PhysicsCase& cs,
                        const ComplexStokesField& state, const ComplexStokesField& adjoint,
                        const AuxiliaryStates& aux) {
  Diagnostics d;
  d.J = cost_J(mesh, spaces, state);
  d.max_abs_u_i = state.max_abs_u_imag();
  d.max_abs_p_i = state.max_abs_p_imag();
  d.max_abs_v = adjoint.max_abs_u();
  d.max_abs_q = adjoint.max_abs_p();

  // Energy-weighted Kohn-Vogelius gap. The viscosity factor keeps the
  // functional consistent with the alpha-scaled traction below; both vanish
  // together with the overdetermined residual.
  const Eigen::VectorXd diff = aux.u_N.u - aux.u_D.u;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementMap em = element_map(mesh, spaces, t);
    for (const auto& q : triangle_rule()) {
      const Eigen::Matrix2d jd = velocity_jacobian(em, diff, q.l0, q.l1, q.l2);
      d.J_KV += 0.5 * cs.alpha * q.w * em.area * jd.squaredNorm();
    }
  }

  for (int be = 0; be < static_cast<int>(mesh.boundary_edges.size()); ++be) {
    if (mesh.boundary_edges[be].label != BoundaryLabel::SigmaFree) continue;
    const EdgeFrame fr = EdgeFrame::sigma_edge(mesh, spaces, be);
    const auto& edge = mesh.boundary_edges[be];
    for (const auto& q : edge_rule()) {
      const double w = q.w * fr.ell;
      const Vec2 n = fr.n(q.s);
      const Eigen::Vector2d un = fr.vel(aux.u_N.u, q.s);
      d.J_D += 0.5 * w * std::pow(un.dot(n), 2);

      // One-sided viscous traction of the slip state from its triangle,
      // matching the free-surface condition -p n + alpha du/dn = 0.
      double l[3];
      edge_barycentric(mesh, fr.tri, edge.a, edge.b, q.s, l);
      const ElementMap em = element_map(mesh, spaces, fr.tri);
      const Eigen::Matrix2d ju = velocity_jacobian(em, aux.u_D.u, l[0], l[1], l[2]);
      const double pd = fr.pres(aux.u_D.p, q.s);
      const Eigen::Vector2d traction = -pd * n + cs.alpha * ju * n;
      d.J_N += 0.5 * w * traction.squaredNorm();
    }
  }
  return d;
}

std::pair<double, double> pressure_shift_stats(const AuxiliaryStates& aux) {
  const Eigen::VectorXd diff = aux.u_D.p - aux.u_N.p;
  const double mean = diff.mean();
  const double var = (diff.array() - mean).square().mean();
  return {mean, std::sqrt(var)};
}

}  // namespace ccbm
