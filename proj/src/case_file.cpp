#include "ccbm/case_file.hpp"

#include <fstream>
#include <json.hpp>

#include "ccbm/expression.hpp"

namespace ccbm {

namespace {

using nlohmann::json;

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

double number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
  return v.get<double>();
}

int integer(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ParseError(path + "." + key + ": expected an integer");
  return v.get<int>();
}

std::array<Expr, 2> vector_expr(const json& j, const std::string& key,
                                const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_string())
    throw ParseError(path + "." + key + ": expected two expression strings");
  try {
    return {Expr::parse(v[0].get<std::string>()), Expr::parse(v[1].get<std::string>())};
  } catch (const ParseError& e) {
    throw ParseError(path + "." + key + ": " + e.what());
  }
}

CurveSpec parse_curve(const json& j, const std::string& path) {
  const std::string type = require(j, "type", path).get<std::string>();
  if (type == "circle") return CurveSpec::circle(number(j, "radius", path));
  if (type == "ellipse")
    return CurveSpec::ellipse(number(j, "a", path), number(j, "b", path));
  if (type == "polar_series") {
    std::vector<std::array<double, 2>> coeffs;
    if (j.contains("coeffs")) {
      for (const auto& c : j.at("coeffs")) {
        if (!c.is_array() || c.size() != 2)
          throw ParseError(path + ".coeffs: expected [cos,sin] pairs");
        coeffs.push_back({c[0].get<double>(), c[1].get<double>()});
      }
    }
    return CurveSpec::polar_series(number(j, "c0", path), std::move(coeffs));
  }
  throw ParseError(path + ".type: unknown curve type '" + type + "'");
}

}  // namespace

CaseFile parse_case_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }

  CaseFile cf;
  cf.label = j.value("label", "case");

  const json& geo = require(j, "geometry", "");
  cf.geometry.inner_radius = number(geo, "inner_radius", "geometry");
  cf.geometry.outer_curve = parse_curve(require(geo, "outer_curve", "geometry"), "geometry.outer_curve");
  cf.geometry.n_inner = integer(geo, "n_inner", "geometry");
  cf.geometry.n_outer = integer(geo, "n_outer", "geometry");
  cf.geometry.target_h = geo.value("target_h", 0.0);
  if (cf.geometry.inner_radius <= 0)
    throw ValidationError("geometry.inner_radius: must be positive");
  if (cf.geometry.n_inner < 8 || cf.geometry.n_outer < 8)
    throw ValidationError("geometry.n_inner/n_outer: need at least 8 nodes");

  const json& phy = require(j, "physics", "");
  cf.physics.label = cf.label;
  cf.physics.alpha = number(phy, "alpha", "physics");
  if (!(cf.physics.alpha > 0)) throw ValidationError("physics.alpha: must be positive");
  const auto f = vector_expr(phy, "f", "physics");
  const auto g = vector_expr(phy, "g", "physics");
  const auto fx_x = f[0].derivative('x'), fx_y = f[0].derivative('y');
  const auto fy_x = f[1].derivative('x'), fy_y = f[1].derivative('y');
  cf.physics.f = [f](const Vec2& p) {
    return Vec2(f[0].eval(p.x(), p.y()), f[1].eval(p.x(), p.y()));
  };
  cf.physics.g = [g](const Vec2& p) {
    return Vec2(g[0].eval(p.x(), p.y()), g[1].eval(p.x(), p.y()));
  };
  cf.physics.f_jacobian = [fx_x, fx_y, fy_x, fy_y](const Vec2& p) {
    Eigen::Matrix2d m;
    m << fx_x.eval(p.x(), p.y()), fx_y.eval(p.x(), p.y()),
         fy_x.eval(p.x(), p.y()), fy_y.eval(p.x(), p.y());
    return m;
  };

  if (j.contains("optimizer")) {
    const json& opt = j.at("optimizer");
    cf.optimizer.mu = opt.value("mu", cf.optimizer.mu);
    cf.optimizer.max_iters = opt.value("max_iters", cf.optimizer.max_iters);
    cf.optimizer.backtrack_factor = opt.value("backtrack_factor", cf.optimizer.backtrack_factor);
    cf.optimizer.max_backtracks = opt.value("max_backtracks", cf.optimizer.max_backtracks);
    cf.optimizer.gradient_norm_floor =
        opt.value("gradient_norm_floor", cf.optimizer.gradient_norm_floor);
    cf.optimizer.c_N = opt.value("c_N", cf.optimizer.c_N);
    cf.optimizer.ordered_assembly = opt.value("ordered_assembly", true);
  }
  try {
    cf.optimizer.check();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("optimizer: ") + e.what());
  }

  if (j.contains("output")) {
    const json& out = j.at("output");
    cf.output.directory = out.value("directory", cf.output.directory);
    cf.output.vtk = out.value("vtk", cf.output.vtk);
    cf.output.snapshot_stride = out.value("snapshot_stride", cf.output.snapshot_stride);
  }
  return cf;
}

CaseFile parse_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_case_text(text);
}

}  // namespace ccbm
