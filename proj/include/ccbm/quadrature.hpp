#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace ccbm {

struct TriQuadPoint {
  double l0, l1, l2;  // barycentric coordinates
  double w;           // weights sum to 1; int_T f = area * sum w f
};

// Seven-point rule, exact for polynomials up to degree 5.
inline const std::vector<TriQuadPoint>& triangle_rule() {
  static const std::vector<TriQuadPoint> rule = [] {
    std::vector<TriQuadPoint> r;
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
    const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
    r.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0});
    for (int i = 0; i < 3; ++i) {
      double l[3] = {a1, a1, a1};
      l[i] = 1.0 - 2.0 * a1;
      r.push_back({l[0], l[1], l[2], w1});
      double m[3] = {a2, a2, a2};
      m[i] = 1.0 - 2.0 * a2;
      r.push_back({m[0], m[1], m[2], w2});
    }
    return r;
  }();
  return rule;
}

struct EdgeQuadPoint {
  double s;  // position in [0,1] along the edge
  double w;  // weight, sums to 1
};

// Four-point Gauss-Legendre rule on [0,1], exact for degree 7.
inline const std::vector<EdgeQuadPoint>& edge_rule() {
  static const std::vector<EdgeQuadPoint> rule = [] {
    const double x1 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double x2 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double w1 = (18.0 + std::sqrt(30.0)) / 72.0;
    const double w2 = (18.0 - std::sqrt(30.0)) / 72.0;
    std::vector<EdgeQuadPoint> r = {
        {0.5 * (1.0 - x2), w2}, {0.5 * (1.0 - x1), w1},
        {0.5 * (1.0 + x1), w1}, {0.5 * (1.0 + x2), w2}};
    return r;
  }();
  return rule;
}

}  // namespace ccbm
