#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "ccbm/mesh.hpp"

namespace ccbm {

// Physical data of a run: alpha = 1/Re, body force f, prescribed velocity g
// on the fixed boundary. f_jacobian supplies the spatial Jacobian of f for
// the distributed shape-derivative form; case files fill it by symbolic
// differentiation of the f expressions.
struct PhysicsCase {
  double alpha = 1.0;
  std::function<Vec2(const Vec2&)> f;
  std::function<Vec2(const Vec2&)> g;
  std::function<Eigen::Matrix2d(const Vec2&)> f_jacobian;  // (i,j) = df_i/dx_j
  std::string label;

  void check() const {
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (!f || !g) throw ValidationError("physics case needs f and g");
  }
};

}  // namespace ccbm
