// Command-line driver: solve, optimize, check-gradient, mms, diagnostics.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "ccbm/case_file.hpp"
#include "ccbm/mms.hpp"
#include "ccbm/vtk_io.hpp"

namespace fs = std::filesystem;
using namespace ccbm;

namespace {

struct CommonArgs {
  std::string config;
  std::string out;
  int max_iters_override = -1;
  int snapshots_override = -1;
  unsigned seed = 0;  // accepted for interface stability; the pipeline is deterministic
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", args.config, "case file (JSON)");
  if (needs_config) opt->required();
  cmd->add_option("--out", args.out, "output directory (defaults to the case file's)");
  cmd->add_option("--max-iters", args.max_iters_override, "override optimizer.max_iters");
  cmd->add_option("--snapshots", args.snapshots_override, "VTK snapshot stride");
  cmd->add_option("--seed", args.seed, "unused; runs are deterministic");
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory " + dir);
  return p;
}

// A smooth radial field vanishing on Gamma; default probe direction for the
// gradient check.
DisplacementField radial_probe(const Mesh& mesh, double gamma_radius) {
  return DisplacementField::sample(mesh, [gamma_radius](const Vec2& x) {
    const double r = x.norm();
    return Vec2((r - gamma_radius) * x.x(), (r - gamma_radius) * x.y());
  });
}

int cmd_solve(const CommonArgs& args) {
  const CaseFile cf = parse_case(args.config);
  const fs::path out = ensure_dir(args.out.empty() ? cf.output.directory : args.out);
  const Mesh mesh = cf.geometry.build();
  const FeSpacePair sp = build_spaces(mesh);
  const ComplexStokesField state = solve_state(mesh, sp, cf.physics);
  const ComplexStokesField adjoint = solve_adjoint(mesh, sp, cf.physics, state);
  const AuxiliaryStates aux = solve_auxiliary_states(mesh, sp, cf.physics);
  const Diagnostics d = diagnostics(mesh, sp, cf.physics, state, adjoint, aux);

  std::printf("J         = %.12e\n", d.J);
  std::printf("J_KV      = %.12e\nJ_D       = %.12e\nJ_N       = %.12e\n", d.J_KV, d.J_D, d.J_N);
  std::printf("max|u_i|  = %.6e\nmax|p_i|  = %.6e\n", d.max_abs_u_i, d.max_abs_p_i);
  std::printf("max|v|    = %.6e\nmax|q|    = %.6e\n", d.max_abs_v, d.max_abs_q);

  if (cf.output.vtk) {
    const CurvatureField curv = curvature(mesh, sp, cf.optimizer.c_N);
    const Eigen::VectorXd functional =
        shape_derivative_boundary_functional(mesh, sp, cf.physics, state, adjoint, curv);
    const Eigen::VectorXd density = shape_gradient_density(mesh, functional);
    VtkFields fields;
    fields.spaces = &sp;
    fields.state = &state;
    fields.adjoint = &adjoint;
    fields.g_sigma = &density;
    export_vtk(mesh, fields, (out / "solution.vtk").string());
    std::printf("wrote %s\n", (out / "solution.vtk").c_str());
  }
  return 0;
}

int cmd_optimize(const CommonArgs& args) {
  CaseFile cf = parse_case(args.config);
  if (args.max_iters_override >= 0) cf.optimizer.max_iters = args.max_iters_override;
  if (args.snapshots_override >= 0) cf.output.snapshot_stride = args.snapshots_override;
  const fs::path out = ensure_dir(args.out.empty() ? cf.output.directory : args.out);

  const Mesh initial = cf.geometry.build();
  SnapshotHook hook;
  if (cf.output.vtk && cf.output.snapshot_stride > 0) {
    ensure_dir((out / "snapshots").string());
    hook = [&](int iter, const Mesh& m, const FeSpacePair& sp, const ComplexStokesField& st,
               const ComplexStokesField& adj, const Eigen::VectorXd& dens) {
      if (iter % cf.output.snapshot_stride != 0) return;
      char name[64];
      std::snprintf(name, sizeof(name), "snap_%04d.vtk", iter);
      VtkFields f;
      f.spaces = &sp;
      f.state = &st;
      f.adjoint = &adj;
      f.g_sigma = &dens;
      export_vtk(m, f, (out / "snapshots" / name).string());
    };
  }

  const RunHistory history = run(initial, cf.physics, cf.optimizer, hook);
  write_history_csv(history, (out / "history.csv").string());

  const Mesh& final_mesh = history.final_mesh;
  const FeSpacePair sp = build_spaces(final_mesh);
  const ComplexStokesField state = solve_state(final_mesh, sp, cf.physics);
  const ComplexStokesField adjoint = solve_adjoint(final_mesh, sp, cf.physics, state);
  if (cf.output.vtk) {
    VtkFields f;
    f.spaces = &sp;
    f.state = &state;
    f.adjoint = &adjoint;
    export_vtk(final_mesh, f, (out / "final.vtk").string());
  }

  const auto& last = history.records.back();
  std::printf("iterations   = %d\n", last.iter);
  std::printf("J initial    = %.6e\nJ final      = %.6e\n", history.records.front().J, last.J);
  std::printf("|theta|_H1   = %.6e\n", last.grad_h1_norm);
  std::printf("max|p_i|     = %.6e\nmax|q|       = %.6e\n", state.max_abs_p_imag(),
              adjoint.max_abs_p());
  std::printf("wrote %s and %s\n", (out / "history.csv").c_str(), (out / "final.vtk").c_str());

  if (history.status == RunStatus::Stalled) {
    std::fprintf(stderr, "error[stall]: line search plateau; history written\n");
    return 5;
  }
  return 0;
}

int cmd_check_gradient(const CommonArgs& args, std::vector<double> ladder) {
  const CaseFile cf = parse_case(args.config);
  const fs::path out = ensure_dir(args.out.empty() ? cf.output.directory : args.out);
  if (ladder.empty()) ladder = {1e-2, 1e-3, 1e-4};

  const Mesh mesh = cf.geometry.build();
  const DisplacementField theta = radial_probe(mesh, cf.geometry.inner_radius);
  const ShapeDerivativeReport rep =
      fd_gradient_check(mesh, cf.physics, theta, ladder, cf.optimizer.c_N);

  std::printf("dJ_boundary    = %.12e\ndJ_distributed = %.12e\n", rep.dJ_boundary,
              rep.dJ_distributed);
  std::printf("%12s %20s %14s %14s\n", "t", "fd_quotient", "err_boundary", "err_distrib");
  for (const auto& r : rep.rows)
    std::printf("%12.3e %20.12e %14.6e %14.6e\n", r.t, r.fd_quotient, r.err_boundary,
                r.err_distributed);
  write_report_csv(rep, (out / "gradient_check.csv").string());
  std::printf("wrote %s\n", (out / "gradient_check.csv").c_str());
  return 0;
}

int cmd_mms(int levels, const std::string& out_dir) {
  const MmsStudy study = mms_convergence(levels);
  std::printf("%10s %16s %16s\n", "h", "err_u_H1", "err_p_L2");
  for (const auto& l : study.levels)
    std::printf("%10.4e %16.8e %16.8e\n", l.h, l.err_u_h1, l.err_p_l2);
  std::printf("observed orders: velocity H1 %.3f, pressure L2 %.3f\n", study.order_u,
              study.order_p);
  if (!out_dir.empty()) {
    const fs::path out = ensure_dir(out_dir);
    std::ofstream csv(out / "mms.csv");
    csv << "h,err_u_h1,err_p_l2\n";
    csv.precision(17);
    for (const auto& l : study.levels)
      csv << l.h << "," << l.err_u_h1 << "," << l.err_p_l2 << "\n";
  }
  return 0;
}

int cmd_diagnostics(const CommonArgs& args) {
  const CaseFile cf = parse_case(args.config);
  const Mesh mesh = cf.geometry.build();
  const FeSpacePair sp = build_spaces(mesh);
  const ComplexStokesField state = solve_state(mesh, sp, cf.physics);
  const ComplexStokesField adjoint = solve_adjoint(mesh, sp, cf.physics, state);
  const AuxiliaryStates aux = solve_auxiliary_states(mesh, sp, cf.physics);
  const Diagnostics d = diagnostics(mesh, sp, cf.physics, state, adjoint, aux);
  const auto [shift_mean, shift_std] = pressure_shift_stats(aux);
  std::printf("J    = %.12e\n", d.J);
  std::printf("J_KV = %.12e\nJ_D  = %.12e\nJ_N  = %.12e\n", d.J_KV, d.J_D, d.J_N);
  std::printf("p_D - p_N: mean %.6e, std %.6e\n", shift_mean, shift_std);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stokes free-boundary solver via a complex Robin coupling"};
  app.require_subcommand(1);

  CommonArgs solve_args, opt_args, grad_args, diag_args;
  std::vector<double> ladder;
  int mms_levels = 4;
  std::string mms_out;

  add_common(app.add_subcommand("solve", "one state+adjoint solve with diagnostics"), solve_args);
  add_common(app.add_subcommand("optimize", "full free-boundary descent"), opt_args);
  auto* grad = app.add_subcommand("check-gradient", "finite-difference gradient validation");
  add_common(grad, grad_args);
  grad->add_option("--t", ladder, "step ladder (repeatable)");
  auto* mms = app.add_subcommand("mms", "manufactured-solution convergence table");
  mms->add_option("--levels", mms_levels, "refinement levels");
  mms->add_option("--out", mms_out, "directory for mms.csv");
  add_common(app.add_subcommand("diagnostics", "classical cost functionals on a mesh"),
             diag_args);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand("solve")) return cmd_solve(solve_args);
    if (app.got_subcommand("optimize")) return cmd_optimize(opt_args);
    if (app.got_subcommand("check-gradient")) return cmd_check_gradient(grad_args, ladder);
    if (app.got_subcommand("mms")) return cmd_mms(mms_levels, mms_out);
    if (app.got_subcommand("diagnostics")) return cmd_diagnostics(diag_args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error[parse]: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error[parse]: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error[parse]: %s\n", e.what());
    return 2;
  } catch (const SingularMatrixError& e) {
    std::fprintf(stderr, "error[solver]: %s\n", e.what());
    return 3;
  } catch (const AssemblyError& e) {
    std::fprintf(stderr, "error[solver]: %s\n", e.what());
    return 3;
  } catch (const DegenerateGradientError& e) {
    std::fprintf(stderr, "error[solver]: %s\n", e.what());
    return 3;
  } catch (const GeometryError& e) {
    std::fprintf(stderr, "error[mesh]: %s\n", e.what());
    return 4;
  } catch (const MeshingError& e) {
    std::fprintf(stderr, "error[mesh]: %s\n", e.what());
    return 4;
  } catch (const InvertedElementError& e) {
    std::fprintf(stderr, "error[mesh]: %s\n", e.what());
    return 4;
  } catch (const StallError& e) {
    std::fprintf(stderr, "error[stall]: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
