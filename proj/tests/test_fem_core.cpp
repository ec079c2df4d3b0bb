#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>
#include <set>

#include "ccbm/quadrature.hpp"
#include "ccbm/solve.hpp"
#include "ccbm/state_solver.hpp"
#include "test_helpers.hpp"

using namespace ccbm;
using namespace ccbm::testing;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// 4 triangles around the center of a unit square: 5 vertices, 8 edges.
Mesh four_triangle_square() {
  Mesh m;
  m.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  m.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  m.boundary_edges = {{0, 1, BoundaryLabel::SigmaFree},
                      {1, 2, BoundaryLabel::SigmaFree},
                      {2, 3, BoundaryLabel::SigmaFree},
                      {3, 0, BoundaryLabel::SigmaFree}};
  return m;
}

}  // namespace

TEST_CASE("quadrature exactness") {
  // Volume rule: exact for xi^a eta^b up to total degree 5 on the reference
  // triangle (the contract requires degree 4).
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; a + b <= 5; ++b) {
      double integral = 0.0;
      for (const auto& q : triangle_rule())
        integral += 0.5 * q.w * std::pow(q.l1, a) * std::pow(q.l2, b);
      const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      CHECK(integral == doctest::Approx(exact).epsilon(1e-13));
    }
  // Edge rule: exact for s^k up to degree 7 on [0,1] (contract: degree 4).
  for (int k = 0; k <= 7; ++k) {
    double integral = 0.0;
    for (const auto& q : edge_rule()) integral += q.w * std::pow(q.s, k);
    CHECK(integral == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
  }
}

TEST_CASE("build_spaces DOF bookkeeping") {
  SUBCASE("hand-counted square") {
    const Mesh m = four_triangle_square();
    const FeSpacePair sp = build_spaces(m);
    CHECK(sp.velocity_dofs() == 26);  // 2*(5 vertices + 8 edges)
    CHECK(sp.pressure_dofs() == 5);
    CHECK(sp.constrained_dofs.empty());  // no Gamma edges present
  }

  SUBCASE("annulus constrained set covers Gamma vertices and midpoints") {
    const Mesh m = generate_annulus(0.4, CurveSpec::circle(1.0), 16, 40);
    const FeSpacePair sp = build_spaces(m);
    std::set<int> expected;
    for (size_t be = 0; be < m.boundary_edges.size(); ++be) {
      if (m.boundary_edges[be].label != BoundaryLabel::GammaFixed) continue;
      const auto& e = m.boundary_edges[be];
      for (int vn : {e.a, e.b, sp.n_vertices + sp.boundary_edge_gedge[be]}) {
        expected.insert(2 * vn);
        expected.insert(2 * vn + 1);
      }
    }
    const std::set<int> got(sp.constrained_dofs.begin(), sp.constrained_dofs.end());
    CHECK(got == expected);
    CHECK(got.size() == 2 * 2 * 16u);  // 16 vertices + 16 midpoints, 2 components
  }
}

TEST_CASE("state assembly contracts") {
  const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 12, 28);
  const FeSpacePair sp = build_spaces(mesh);

  SUBCASE("zero data gives a zero right-hand side") {
    PhysicsCase cs = gravity_case();
    cs.f = [](const Vec2&) { return Vec2::Zero(); };
    const ComplexSparseSystem sys = assemble_state(mesh, sp, cs);
    CHECK(sys.b.norm() == 0.0);
  }

  SUBCASE("forcing enters linearly, matrix unchanged") {
    const PhysicsCase c1 = gravity_case();
    PhysicsCase c2 = gravity_case();
    c2.f = [](const Vec2& x) { return Vec2(-20.0 * x.x(), -20.0 * x.y()); };
    const ComplexSparseSystem s1 = assemble_state(mesh, sp, c1);
    const ComplexSparseSystem s2 = assemble_state(mesh, sp, c2);
    CHECK((s2.b - 2.0 * s1.b).norm() <= 1e-12 * s1.b.norm());
    CHECK(Eigen::SparseMatrix<cdouble>(s2.A - s1.A).norm() == 0.0);
  }

  SUBCASE("non-finite forcing is an assembly error") {
    PhysicsCase cs = gravity_case();
    cs.f = [](const Vec2& x) { return Vec2(1.0 / (x.norm() - x.norm()), 0.0); };
    CHECK_THROWS_AS(assemble_state(mesh, sp, cs), AssemblyError);
  }

  SUBCASE("real velocity-velocity block is symmetric positive definite") {
    const Mesh coarse = ring_mesh(circle_points(1.0, 10), circle_points(0.5, 10, 0.5));
    const FeSpacePair csp = build_spaces(coarse);
    const ComplexSparseSystem sys = assemble_state(coarse, csp, gravity_case());
    const Eigen::MatrixXcd dense(sys.A);
    const Eigen::MatrixXd K =
        dense.topLeftCorner(sys.n_free_velocity, sys.n_free_velocity).real();
    CHECK((K - K.transpose()).norm() <= 1e-12 * K.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("adjoint assembly contracts") {
  const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 12, 28);
  const FeSpacePair sp = build_spaces(mesh);
  const Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(sp.velocity_dofs());
  const Eigen::VectorXd zero_p = Eigen::VectorXd::Zero(sp.pressure_dofs());

  SUBCASE("zero sources give a zero right-hand side") {
    const ComplexSparseSystem sys = assemble_adjoint(mesh, sp, 0.01, zero_u, zero_p);
    CHECK(sys.b.norm() == 0.0);
  }

  SUBCASE("adjoint matrix is the complex conjugate of the state matrix") {
    const ComplexSparseSystem st = assemble_state(mesh, sp, gravity_case());
    const ComplexSparseSystem ad = assemble_adjoint(mesh, sp, 0.01, zero_u, zero_p);
    const Eigen::SparseMatrix<cdouble> diff = ad.A - st.A.conjugate();
    CHECK(diff.norm() <= 1e-14 * st.A.norm());
  }

  SUBCASE("constant pressure source fills continuity rows with hat integrals") {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sp.pressure_dofs());
    const ComplexSparseSystem sys = assemble_adjoint(mesh, sp, 0.01, zero_u, ones);
    double area = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
      area += mesh.signed_area(t);
    // Partition of unity: the hat integrals sum to the domain area.
    const cdouble sum = sys.b.tail(sys.n_pressure).sum();
    CHECK(sum.real() == doctest::Approx(area).epsilon(1e-12));
    CHECK(sum.imag() == 0.0);
  }
}

TEST_CASE("direct solver contract") {
  SUBCASE("2x2 diagonal complex system") {
    ComplexSparseSystem sys;
    sys.A.resize(2, 2);
    std::vector<Eigen::Triplet<cdouble>> t = {{0, 0, cdouble(2, 0)}, {1, 1, cdouble(0, 1)}};
    sys.A.setFromTriplets(t.begin(), t.end());
    sys.b.resize(2);
    sys.b << cdouble(2, 0), cdouble(0, 1);
    const Eigen::VectorXcd x = solve(sys);
    CHECK(std::abs(x[0] - cdouble(1, 0)) < 1e-14);
    CHECK(std::abs(x[1] - cdouble(1, 0)) < 1e-14);
  }

  SUBCASE("zero data solves to zero") {
    const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 12, 28);
    const FeSpacePair sp = build_spaces(mesh);
    PhysicsCase cs = gravity_case();
    cs.f = [](const Vec2&) { return Vec2::Zero(); };
    const ComplexStokesField f = solve_state(mesh, sp, cs);
    CHECK(f.u.norm() == 0.0);
    CHECK(f.p.norm() == 0.0);
  }

  SUBCASE("random saddle system meets the residual bound") {
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;
    const int nu = 40, np = 12;
    Eigen::MatrixXcd M(nu, nu);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nu; ++j) M(i, j) = cdouble(gauss(rng), gauss(rng));
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nu + np, nu + np);
    A.topLeftCorner(nu, nu) = M * M.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(nu, nu);
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < nu; ++j) {
        A(nu + i, j) = cdouble(gauss(rng), 0.0);
        A(j, nu + i) = A(nu + i, j);
      }
    ComplexSparseSystem sys;
    sys.A = A.sparseView();
    sys.b.resize(nu + np);
    for (int i = 0; i < nu + np; ++i) sys.b[i] = cdouble(gauss(rng), gauss(rng));
    const Eigen::VectorXcd x = solve(sys);
    CHECK((A * x - sys.b).norm() / sys.b.norm() <= 1e-10);
  }

  SUBCASE("a singular system is reported") {
    ComplexSparseSystem sys;
    sys.A.resize(2, 2);
    std::vector<Eigen::Triplet<cdouble>> t = {{0, 0, cdouble(1, 0)},
                                              {0, 1, cdouble(1, 0)},
                                              {1, 0, cdouble(1, 0)},
                                              {1, 1, cdouble(1, 0)}};
    sys.A.setFromTriplets(t.begin(), t.end());
    sys.b.resize(2);
    sys.b << cdouble(1, 0), cdouble(2, 0);
    CHECK_THROWS_AS(solve(sys), SingularMatrixError);
  }
}

TEST_CASE("discrete continuity and Dirichlet trace of the solved state") {
  const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 16, 40);
  const FeSpacePair sp = build_spaces(mesh);
  PhysicsCase cs = gravity_case();
  cs.g = [](const Vec2& x) { return Vec2(-x.y(), x.x()); };  // tangential stirring
  const ComplexStokesField f = solve_state(mesh, sp, cs);

  const Eigen::SparseMatrix<double> B = divergence_matrix(mesh, sp);
  const Eigen::VectorXcd div = B.cast<cdouble>() * f.u;
  CHECK(div.cwiseAbs().maxCoeff() <= 1e-9 * f.u.norm());

  for (int d : sp.constrained_dofs) {
    const Vec2 gv = cs.g(sp.vnode_coord(mesh, d / 2));
    CHECK(std::abs(f.u[d] - gv[d % 2]) <= 1e-12);
  }
}

TEST_CASE("solution is linear in the forcing") {
  const Mesh mesh = generate_annulus(0.4, CurveSpec::circle(1.0), 14, 36);
  const FeSpacePair sp = build_spaces(mesh);
  const PhysicsCase c1 = gravity_case();
  PhysicsCase c2 = gravity_case();
  c2.f = [](const Vec2& x) { return Vec2(std::sin(x.y()), x.x() * x.x()); };
  PhysicsCase c12 = gravity_case();
  c12.f = [f1 = c1.f, f2 = c2.f](const Vec2& x) { return (f1(x) + f2(x)).eval(); };

  const ComplexStokesField s1 = solve_state(mesh, sp, c1);
  const ComplexStokesField s2 = solve_state(mesh, sp, c2);
  const ComplexStokesField s12 = solve_state(mesh, sp, c12);
  CHECK((s12.u - s1.u - s2.u).norm() <= 1e-9 * (s1.u.norm() + s2.u.norm()));
  CHECK((s12.p - s1.p - s2.p).norm() <= 1e-9 * (s1.p.norm() + s2.p.norm()));
}

TEST_CASE("real part of the state solves the real system with coupling data") {
  // Re-assembling the real Stokes problem with the solved u_i as Sigma
  // traction data must reproduce (u_r, p_r).
  const Mesh mesh = generate_annulus(0.4, CurveSpec::ellipse(1.0, 1.1), 16, 40);
  const FeSpacePair sp = build_spaces(mesh);
  const PhysicsCase cs = gravity_case();
  const ComplexStokesField f = solve_state(mesh, sp, cs);
  const Eigen::VectorXd ui = f.u_imag();

  RealStokesOptions opt;
  opt.alpha = cs.alpha;
  opt.f = cs.f;
  opt.g = cs.g;
  opt.sigma_load = [&](int bedge, double s, const Vec2&, const Vec2& n) {
    const EdgeFrame fr = EdgeFrame::sigma_edge(mesh, sp, bedge);
    const Eigen::Vector2d uiv = fr.vel(ui, s);
    return (uiv.dot(n) * n).eval();
  };
  const RealStokesSolution real = solve_real_stokes(mesh, sp, opt);
  CHECK((real.u - f.u.real()).norm() <= 1e-8 * std::max(1.0, f.u.real().norm()));
  CHECK((real.p - f.p.real()).norm() <= 1e-8 * std::max(1.0, f.p.real().norm()));
}
