#pragma once

#include <string>

#include "ccbm/mesh.hpp"
#include "ccbm/optimizer.hpp"
#include "ccbm/physics.hpp"

namespace ccbm {

struct GeometrySpec {
  double inner_radius = 0.4;
  CurveSpec outer_curve;
  int n_inner = 30;
  int n_outer = 70;
  double target_h = 0.0;  // 0 = derive from boundary spacing

  Mesh build() const {
    return generate_annulus(inner_radius, outer_curve, n_inner, n_outer, target_h);
  }
};

struct OutputSpec {
  std::string directory = "out";
  bool vtk = true;
  int snapshot_stride = 0;  // 0 = no per-iteration snapshots
};

struct CaseFile {
  std::string label;
  PhysicsCase physics;
  OptConfig optimizer;
  GeometrySpec geometry;
  OutputSpec output;
};

// Parses and validates a JSON case file. ParseError carries the offending
// field path; ValidationError flags semantically bad values.
CaseFile parse_case(const std::string& path);
CaseFile parse_case_text(const std::string& text);

}  // namespace ccbm
