#include "ccbm/optimizer.hpp"

#include <fstream>

namespace ccbm {

double propose_step(double J, double theta_h1_norm_sq, double mu) {
  if (J == 0.0) return 0.0;
  if (!(theta_h1_norm_sq > 1e-28))
    throw DegenerateGradientError("gradient norm vanished while J > 0");
  return mu * J / theta_h1_norm_sq;
}

LineSearchResult line_search(const Mesh& mesh, const PhysicsCase& cs,
                             const DisplacementField& theta, double t0,
                             const OptConfig& config, double J_old) {
  double t = t0;
  for (int i = 0; i <= config.max_backtracks; ++i, t *= config.backtrack_factor) {
    Mesh trial;
    try {
      trial = deform(mesh, theta, t);
    } catch (const InvertedElementError&) {
      continue;
    }
    const FeSpacePair sp = build_spaces(trial);
    const double J_new = cost_J(trial, sp, solve_state(trial, sp, cs));
    if (J_new < J_old) return {t, std::move(trial), J_new, i};
  }
  throw StallError("line search found no decreasing step");
}

RunHistory run(const Mesh& initial, const PhysicsCase& cs, const OptConfig& config,
               const SnapshotHook& snapshot) {
  config.check();
  cs.check();
  initial.validate();

  RunHistory history;
  Mesh mesh = initial;
  for (int k = 0;; ++k) {
    FeSpacePair sp;
    ComplexStokesField state, adjoint;
    DisplacementField theta;
    IterationRecord rec;
    try {
      sp = build_spaces(mesh);
      state = solve_state(mesh, sp, cs);
      adjoint = solve_adjoint(mesh, sp, cs, state);
      const CurvatureField curv = curvature(mesh, sp, config.c_N);
      const AuxiliaryStates aux = solve_auxiliary_states(mesh, sp, cs);

      rec.iter = k;
      rec.diag = diagnostics(mesh, sp, cs, state, adjoint, aux);
      rec.J = rec.diag.J;
      rec.quality = quality(mesh);

      const Eigen::VectorXd functional =
          shape_derivative_boundary_functional(mesh, sp, cs, state, adjoint, curv);
      theta = sobolev_gradient(mesh, sp, cs, state, adjoint, curv);
      rec.grad_h1_norm = theta.h1_norm;
      rec.dJ_theta = functional.dot(theta.values);

      if (snapshot)
        snapshot(k, mesh, sp, state, adjoint, shape_gradient_density(mesh, functional));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("iteration " + std::to_string(k) + ": " + e.what());
    }
    history.records.push_back(rec);

    if (k >= config.max_iters) {
      history.status = RunStatus::MaxIters;
      break;
    }
    if (config.gradient_norm_floor > 0.0 && rec.grad_h1_norm <= config.gradient_norm_floor) {
      history.status = RunStatus::GradientFloor;
      break;
    }

    double t0 = 0.0;
    try {
      t0 = propose_step(rec.J, rec.grad_h1_norm * rec.grad_h1_norm, config.mu);
    } catch (const DegenerateGradientError&) {
      history.status = RunStatus::Stalled;
      break;
    }
    if (t0 == 0.0) {
      history.status = RunStatus::GradientFloor;
      break;
    }

    try {
      LineSearchResult ls = line_search(mesh, cs, theta, t0, config, rec.J);
      history.records.back().step = ls.t;
      history.records.back().backtracks = ls.backtracks;
      mesh = std::move(ls.mesh);
    } catch (const StallError&) {
      history.status = RunStatus::Stalled;
      break;
    }
  }
  history.final_mesh = mesh;
  return history;
}

void write_history_csv(const RunHistory& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "iter,J,grad_h1_norm,step,backtracks,J_KV,J_D,J_N,max_u_i,max_p_i,min_tri_area\n";
  out.precision(17);
  for (const auto& r : history.records)
    out << r.iter << "," << r.J << "," << r.grad_h1_norm << "," << r.step << ","
        << r.backtracks << "," << r.diag.J_KV << "," << r.diag.J_D << "," << r.diag.J_N
        << "," << r.diag.max_abs_u_i << "," << r.diag.max_abs_p_i << ","
        << r.quality.min_area << "\n";
}

}  // namespace ccbm
