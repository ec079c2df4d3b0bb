#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "ccbm/errors.hpp"

namespace ccbm {

using Vec2 = Eigen::Vector2d;

enum class BoundaryLabel { GammaFixed, SigmaFree };

// A closed star-shaped curve around the origin, given as radius(angle).
// Covers the outer-boundary shapes used by the case files: circles, ellipses
// and truncated polar Fourier series.
struct CurveSpec {
  std::function<double(double)> radius;  // r(phi), must be positive

  Vec2 point(double phi) const {
    const double r = radius(phi);
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  static CurveSpec circle(double r);
  static CurveSpec ellipse(double a, double b);
  // r(phi) = c0 + sum_k a_k cos(k phi) + b_k sin(k phi)
  static CurveSpec polar_series(double c0, std::vector<std::array<double, 2>> coeffs);
};

struct BoundaryEdge {
  int a = -1, b = -1;  // node ids, oriented so the domain lies on the left
  BoundaryLabel label = BoundaryLabel::SigmaFree;
};

// Annular triangulation. Nodes are triangle vertices only; quadratic
// mid-edge unknowns live in FeSpacePair. Immutable by convention: all
// operations return new meshes.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  static constexpr int dimension = 2;

  double signed_area(int t) const {
    const Vec2 &p0 = nodes[triangles[t][0]], &p1 = nodes[triangles[t][1]],
               &p2 = nodes[triangles[t][2]];
    return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                  (p2.x() - p0.x()) * (p1.y() - p0.y()));
  }

  // Checks positive areas, two disjoint closed boundary loops (one per
  // label) with Gamma strictly inside Sigma, and that every boundary edge
  // belongs to exactly one triangle. Throws MeshingError on violation.
  void validate(bool annulus_topology = true) const;

  std::vector<int> boundary_nodes(BoundaryLabel label) const;
};

// Discrete geometry of the boundary polygons: per-edge frames and per-node
// averaged normals with lumped arclength weights. Normals point out of the
// annulus on both loops.
struct BoundaryGeometry {
  std::vector<Vec2> edge_normal;    // aligned with mesh.boundary_edges
  std::vector<Vec2> edge_tangent;
  std::vector<double> edge_length;
  // Indexed by mesh node id; entries are valid only for boundary nodes.
  std::vector<Vec2> node_normal;
  std::vector<double> node_weight;  // lumped arclength, sums to loop perimeter
  std::vector<char> on_sigma;       // 1 if the node lies on the Sigma loop
  std::vector<char> on_gamma;

  double sigma_perimeter = 0.0;
  double gamma_perimeter = 0.0;
};

struct QualityReport {
  double min_radius_ratio = 0.0;  // inradius / circumradius
  double max_radius_ratio = 0.0;
  double min_area = 0.0;
  double min_sigma_edge = 0.0;
  double max_sigma_edge = 0.0;
};

// Piecewise-linear displacement over mesh vertices, identically zero on
// Gamma. Values are interleaved (x0,y0,x1,y1,...).
struct DisplacementField {
  Eigen::VectorXd values;
  double h1_norm = 0.0;

  Vec2 at(int node) const { return {values[2 * node], values[2 * node + 1]}; }

  // Samples a closed-form field at the vertices and hard-zeroes Gamma ones.
  static DisplacementField sample(const Mesh& mesh,
                                  const std::function<Vec2(const Vec2&)>& f);
};

Mesh generate_annulus(double inner_radius, const CurveSpec& outer_curve,
                      int n_inner, int n_outer, double target_h = 0.0);

// Nodes move to x + t*theta(x); connectivity and labels are unchanged.
// Throws InvertedElementError if any triangle area becomes <= 0.
Mesh deform(const Mesh& mesh, const DisplacementField& theta, double t);

// Splits every triangle into four. Boundary edges are split in place (new
// midpoints stay on the chords) unless a projector is supplied for a label.
Mesh refine_uniform(const Mesh& mesh,
                    const std::function<Vec2(const Vec2&)>* project_sigma = nullptr,
                    const std::function<Vec2(const Vec2&)>* project_gamma = nullptr);

BoundaryGeometry boundary_geometry(const Mesh& mesh);

QualityReport quality(const Mesh& mesh);

}  // namespace ccbm
