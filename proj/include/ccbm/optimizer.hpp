#pragma once

#include <functional>

#include "ccbm/shape_derivative.hpp"
#include "ccbm/state_solver.hpp"

namespace ccbm {

struct OptConfig {
  double mu = 1.0;
  int max_iters = 100;
  double backtrack_factor = 0.5;
  int max_backtracks = 15;
  double gradient_norm_floor = 0.0;  // <= 0 disables the early stop
  double c_N = 1e-8;
  bool ordered_assembly = true;  // element accumulation stays in mesh order

  void check() const {
    if (!(mu > 0.0)) throw ValidationError("mu must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      throw ValidationError("backtrack_factor must lie in (0,1)");
    if (max_iters < 0 || max_backtracks < 0)
      throw ValidationError("iteration counts must be non-negative");
  }
};

struct IterationRecord {
  int iter = 0;
  double J = 0.0;
  double grad_h1_norm = 0.0;
  double step = 0.0;      // accepted step leaving this iterate (0 on the last record)
  int backtracks = 0;
  Diagnostics diag;
  QualityReport quality;
  double dJ_theta = 0.0;  // assembled dJ[theta]; equals -grad_h1_norm^2
};

enum class RunStatus { MaxIters, GradientFloor, Stalled };

struct RunHistory {
  std::vector<IterationRecord> records;
  Mesh final_mesh;
  RunStatus status = RunStatus::MaxIters;
};

// t = mu J / |theta|_H1^2; 0 when J = 0. DegenerateGradientError when the
// gradient vanishes while J > 0.
double propose_step(double J, double theta_h1_norm_sq, double mu);

struct LineSearchResult {
  double t = 0.0;
  Mesh mesh;
  double J = 0.0;
  int backtracks = 0;
};

// First t in {t0 beta^i} whose deformation stays valid and strictly
// decreases J; StallError after max_backtracks failures.
LineSearchResult line_search(const Mesh& mesh, const PhysicsCase& cs,
                             const DisplacementField& theta, double t0,
                             const OptConfig& config, double J_old);

using SnapshotHook =
    std::function<void(int iter, const Mesh&, const FeSpacePair&, const ComplexStokesField& state,
                       const ComplexStokesField& adjoint, const Eigen::VectorXd& g_density)>;

RunHistory run(const Mesh& initial, const PhysicsCase& cs, const OptConfig& config,
               const SnapshotHook& snapshot = {});

void write_history_csv(const RunHistory& history, const std::string& path);

}  // namespace ccbm
