#pragma once

#include <Eigen/Dense>
#include <complex>

#include "ccbm/spaces.hpp"

namespace ccbm {

using cdouble = std::complex<double>;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

// Complex Taylor-Hood coefficients. The same container holds the state
// (u, p) and, when solved as such, the adjoint (v, q).
struct ComplexStokesField {
  Eigen::VectorXcd u;  // size 2*(n_vertices + n_edges), interleaved components
  Eigen::VectorXcd p;  // size n_vertices

  Eigen::VectorXd u_imag() const { return u.imag(); }
  Eigen::VectorXd p_imag() const { return p.imag(); }

  double max_abs_u_imag() const { return u.size() ? u.imag().cwiseAbs().maxCoeff() : 0.0; }
  double max_abs_p_imag() const { return p.size() ? p.imag().cwiseAbs().maxCoeff() : 0.0; }
  double max_abs_u() const { return u.size() ? u.cwiseAbs().maxCoeff() : 0.0; }
  double max_abs_p() const { return p.size() ? p.cwiseAbs().maxCoeff() : 0.0; }
};

// --- in-triangle evaluation -------------------------------------------------

template <typename Vec>
auto eval_velocity(const ElementMap& em, const Vec& coeffs, double l0, double l1,
                   double l2) {
  using Scalar = typename Vec::Scalar;
  double N[6];
  p2_shape(l0, l1, l2, N);
  Eigen::Matrix<Scalar, 2, 1> v = Eigen::Matrix<Scalar, 2, 1>::Zero();
  for (int a = 0; a < 6; ++a) {
    v.x() += N[a] * coeffs[2 * em.vnode[a]];
    v.y() += N[a] * coeffs[2 * em.vnode[a] + 1];
  }
  return v;
}

// Jacobian (i,j) = du_i/dx_j of the quadratic velocity at a point.
template <typename Vec>
auto velocity_jacobian(const ElementMap& em, const Vec& coeffs, double l0, double l1,
                       double l2) {
  using Scalar = typename Vec::Scalar;
  Eigen::Vector2d G[6];
  p2_shape_grad(l0, l1, l2, G);
  Eigen::Matrix<Scalar, 2, 2> jac = Eigen::Matrix<Scalar, 2, 2>::Zero();
  for (int a = 0; a < 6; ++a) {
    const Eigen::Vector2d g = em.jac_inv_t * G[a];
    jac.row(0) += coeffs[2 * em.vnode[a]] * g.transpose();
    jac.row(1) += coeffs[2 * em.vnode[a] + 1] * g.transpose();
  }
  return jac;
}

template <typename Vec>
auto eval_pressure(const ElementMap& em, const Vec& coeffs, double l0, double l1,
                   double l2) {
  return coeffs[em.pnode[0]] * l0 + coeffs[em.pnode[1]] * l1 + coeffs[em.pnode[2]] * l2;
}

// Constant per-triangle gradient of a linear scalar field.
template <typename Vec>
auto pressure_gradient(const ElementMap& em, const Vec& coeffs) {
  using Scalar = typename Vec::Scalar;
  const Eigen::Vector2d g0 = em.jac_inv_t * Eigen::Vector2d(-1, -1);
  const Eigen::Vector2d g1 = em.jac_inv_t * Eigen::Vector2d(1, 0);
  const Eigen::Vector2d g2 = em.jac_inv_t * Eigen::Vector2d(0, 1);
  Eigen::Matrix<Scalar, 2, 1> g = Eigen::Matrix<Scalar, 2, 1>::Zero();
  g += coeffs[em.pnode[0]] * g0;
  g += coeffs[em.pnode[1]] * g1;
  g += coeffs[em.pnode[2]] * g2;
  return g;
}

// Constant per-triangle Jacobian of a piecewise-linear vector field stored
// interleaved over vertices (a DisplacementField).
inline Eigen::Matrix2d p1_vector_jacobian(const ElementMap& em, const Eigen::VectorXd& v) {
  const Eigen::Vector2d g0 = em.jac_inv_t * Eigen::Vector2d(-1, -1);
  const Eigen::Vector2d g1 = em.jac_inv_t * Eigen::Vector2d(1, 0);
  const Eigen::Vector2d g2 = em.jac_inv_t * Eigen::Vector2d(0, 1);
  Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
  const Eigen::Vector2d g[3] = {g0, g1, g2};
  for (int k = 0; k < 3; ++k) {
    jac.row(0) += v[2 * em.pnode[k]] * g[k].transpose();
    jac.row(1) += v[2 * em.pnode[k] + 1] * g[k].transpose();
  }
  return jac;
}

template <typename Vec>
auto p1_vector_at(const ElementMap& em, const Vec& v, double l0, double l1, double l2) {
  using Scalar = typename Vec::Scalar;
  Eigen::Matrix<Scalar, 2, 1> out = Eigen::Matrix<Scalar, 2, 1>::Zero();
  const double l[3] = {l0, l1, l2};
  for (int k = 0; k < 3; ++k) {
    out.x() += l[k] * v[2 * em.pnode[k]];
    out.y() += l[k] * v[2 * em.pnode[k] + 1];
  }
  return out;
}

// --- boundary-edge traces ---------------------------------------------------

// Frame and trace evaluation on one boundary edge. Arclength derivatives are
// true d/ds (the unit parameter derivative divided by the edge length). The
// normal along the edge interpolates the averaged vertex normals linearly,
// matching the Robin term and the tangential calculus.
struct EdgeFrame {
  int node_a = -1, node_b = -1, node_m = -1;  // velocity nodes (m = midpoint)
  int tri = -1;
  double ell = 0.0;
  Vec2 xa, tau;      // unit tangent a -> b; outward normal is (tau.y,-tau.x)
  Vec2 na, nb;       // averaged vertex normals

  static EdgeFrame sigma_edge(const Mesh& mesh, const FeSpacePair& sp, int bedge);

  Vec2 x(double s) const { return xa + (s * ell) * tau; }
  Vec2 n(double s) const { return (1.0 - s) * na + s * nb; }
  Vec2 dn_ds() const { return (nb - na) / ell; }
  Vec2 edge_normal() const { return {tau.y(), -tau.x()}; }

  template <typename Vec>
  auto vel(const Vec& u, double s) const {
    using Scalar = typename Vec::Scalar;
    const double La = (1 - s) * (1 - 2 * s), Lb = s * (2 * s - 1), Lm = 4 * s * (1 - s);
    Eigen::Matrix<Scalar, 2, 1> v;
    for (int c = 0; c < 2; ++c)
      v[c] = La * u[2 * node_a + c] + Lb * u[2 * node_b + c] + Lm * u[2 * node_m + c];
    return v;
  }

  template <typename Vec>
  auto dvel_ds(const Vec& u, double s) const {
    using Scalar = typename Vec::Scalar;
    const double dLa = 4 * s - 3, dLb = 4 * s - 1, dLm = 4 - 8 * s;
    Eigen::Matrix<Scalar, 2, 1> v;
    for (int c = 0; c < 2; ++c)
      v[c] = (dLa * u[2 * node_a + c] + dLb * u[2 * node_b + c] + dLm * u[2 * node_m + c]) / ell;
    return v;
  }

  template <typename Vec>
  auto pres(const Vec& p, double s) const {
    return (1.0 - s) * p[node_a] + s * p[node_b];
  }

  template <typename Vec>
  auto dpres_ds(const Vec& p) const {
    return (p[node_b] - p[node_a]) / ell;
  }
};

// Tangential Jacobian D_sigma w = (dw/ds) (x) tau of an edge trace; it
// annihilates any normal vector by construction.
template <typename V2>
auto tangential_jacobian(const V2& dw_ds, const Vec2& tau) {
  using Scalar = typename V2::Scalar;
  Eigen::Matrix<Scalar, 2, 2> m;
  m.col(0) = dw_ds * tau.x();
  m.col(1) = dw_ds * tau.y();
  return m;
}

}  // namespace ccbm
