#include "ccbm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace ccbm {

namespace {

constexpr double kPi = 3.14159265358979323846;

double frac(double x) { return x - std::floor(x); }

// Crossing-number point-in-polygon test against a node loop.
bool inside_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  bool inside = false;
  const int n = static_cast<int>(poly.size());
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 &a = poly[i], &b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xint = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < xint) inside = !inside;
    }
  }
  return inside;
}

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
}

bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  const double t1 = adx * (bdy * cd - cdy * bd);
  const double t2 = ady * (bdx * cd - cdx * bd);
  const double t3 = ad * (bdx * cdy - cdx * bdy);
  const double det = t1 - t2 + t3;
  const double mag = std::abs(t1) + std::abs(t2) + std::abs(t3);
  return det > 1e-12 * mag;
}

struct Delaunay {
  std::vector<Vec2> pts;
  std::vector<std::array<int, 3>> tris;

  explicit Delaunay(const std::vector<Vec2>& points) : pts(points) {
    Vec2 lo = pts.front(), hi = pts.front();
    for (const Vec2& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec2 c = 0.5 * (lo + hi);
    const double span = std::max((hi - lo).maxCoeff(), 1e-12);
    const int s0 = static_cast<int>(pts.size());
    pts.push_back(c + Vec2(-20 * span, -10 * span));
    pts.push_back(c + Vec2(20 * span, -10 * span));
    pts.push_back(c + Vec2(0, 25 * span));
    tris.push_back({s0, s0 + 1, s0 + 2});

    for (int i = 0; i < s0; ++i) insert(i);

    // Drop every triangle touching a super vertex.
    std::vector<std::array<int, 3>> kept;
    for (const auto& t : tris)
      if (t[0] < s0 && t[1] < s0 && t[2] < s0) kept.push_back(t);
    tris.swap(kept);
  }

  void insert(int ip) {
    const Vec2& p = pts[ip];
    std::vector<int> bad;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (in_circumcircle(pts[tris[t][0]], pts[tris[t][1]], pts[tris[t][2]], p))
        bad.push_back(t);
    if (bad.empty()) throw MeshingError("Delaunay insertion found no cavity");

    // Cavity boundary: directed edges of bad triangles not shared by two of them.
    std::map<std::pair<int, int>, int> count;
    for (int t : bad)
      for (int e = 0; e < 3; ++e) {
        int a = tris[t][e], b = tris[t][(e + 1) % 3];
        count[{std::min(a, b), std::max(a, b)}]++;
      }
    std::vector<std::array<int, 2>> rim;
    for (int t : bad)
      for (int e = 0; e < 3; ++e) {
        int a = tris[t][e], b = tris[t][(e + 1) % 3];
        if (count[{std::min(a, b), std::max(a, b)}] == 1) rim.push_back({a, b});
      }
    std::sort(bad.rbegin(), bad.rend());
    for (int t : bad) {
      tris[t] = tris.back();
      tris.pop_back();
    }
    for (const auto& e : rim) {
      if (orient2d(pts[e[0]], pts[e[1]], p) <= 0) continue;  // degenerate sliver
      tris.push_back({e[0], e[1], ip});
    }
  }
};

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
  const double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) &&
         o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

using EdgeKey = std::pair<int, int>;
EdgeKey ekey(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Flip-based recovery of a required edge that the Delaunay pass missed.
bool recover_edge(std::vector<std::array<int, 3>>& tris, const std::vector<Vec2>& pts,
                  int a, int b) {
  for (int iter = 0; iter < 200; ++iter) {
    std::map<EdgeKey, std::vector<int>> adj;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      for (int e = 0; e < 3; ++e) adj[ekey(tris[t][e], tris[t][(e + 1) % 3])].push_back(t);
    if (adj.count(ekey(a, b))) return true;

    bool flipped = false;
    for (auto& [key, ts] : adj) {
      if (ts.size() != 2) continue;
      if (!segments_cross(pts[a], pts[b], pts[key.first], pts[key.second])) continue;
      int t1 = ts[0], t2 = ts[1];
      int w = -1, x = -1;
      for (int v : tris[t1])
        if (v != key.first && v != key.second) w = v;
      for (int v : tris[t2])
        if (v != key.first && v != key.second) x = v;
      std::array<int, 3> n1 = {w, key.first, x};
      std::array<int, 3> n2 = {x, key.second, w};
      if (orient2d(pts[n1[0]], pts[n1[1]], pts[n1[2]]) <= 0) continue;
      if (orient2d(pts[n2[0]], pts[n2[1]], pts[n2[2]]) <= 0) continue;
      tris[t1] = n1;
      tris[t2] = n2;
      flipped = true;
      break;
    }
    if (!flipped) return false;
  }
  return false;
}

}  // namespace

CurveSpec CurveSpec::circle(double r) {
  return {[r](double) { return r; }};
}

CurveSpec CurveSpec::ellipse(double a, double b) {
  return {[a, b](double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return a * b / std::sqrt(b * b * c * c + a * a * s * s);
  }};
}

CurveSpec CurveSpec::polar_series(double c0, std::vector<std::array<double, 2>> coeffs) {
  return {[c0, coeffs = std::move(coeffs)](double phi) {
    double r = c0;
    for (size_t k = 0; k < coeffs.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      r += coeffs[k][0] * std::cos(kk * phi) + coeffs[k][1] * std::sin(kk * phi);
    }
    return r;
  }};
}

void Mesh::validate(bool annulus_topology) const {
  const int nn = static_cast<int>(nodes.size());
  for (const auto& t : triangles)
    for (int v : t)
      if (v < 0 || v >= nn) throw MeshingError("triangle references missing node");
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
    if (signed_area(t) <= 0.0) throw MeshingError("non-positive triangle area");

  // Boundary edges must each be an edge of exactly one triangle, with
  // matching orientation (domain on the left).
  std::map<EdgeKey, int> ecount;
  std::set<std::pair<int, int>> directed;
  for (const auto& t : triangles)
    for (int e = 0; e < 3; ++e) {
      ecount[ekey(t[e], t[(e + 1) % 3])]++;
      directed.insert({t[e], t[(e + 1) % 3]});
    }
  for (const auto& be : boundary_edges) {
    auto it = ecount.find(ekey(be.a, be.b));
    if (it == ecount.end() || it->second != 1)
      throw MeshingError("boundary edge not on exactly one triangle");
    if (!directed.count({be.a, be.b}))
      throw MeshingError("boundary edge orientation disagrees with triangle");
  }
  // Conversely, every triangle edge with a single adjacent triangle must be listed.
  size_t hull = 0;
  for (const auto& [k, c] : ecount)
    if (c == 1) hull++;
  if (hull != boundary_edges.size())
    throw MeshingError("boundary edge list does not cover the mesh hull");

  if (!annulus_topology) return;

  for (BoundaryLabel lbl : {BoundaryLabel::GammaFixed, BoundaryLabel::SigmaFree}) {
    std::map<int, int> next;
    for (const auto& be : boundary_edges)
      if (be.label == lbl) {
        if (next.count(be.a)) throw MeshingError("boundary loop is not simple");
        next[be.a] = be.b;
      }
    if (next.empty()) throw MeshingError("missing boundary loop for a label");
    int start = next.begin()->first, cur = start;
    size_t steps = 0;
    do {
      auto it = next.find(cur);
      if (it == next.end()) throw MeshingError("boundary loop is not closed");
      cur = it->second;
      if (++steps > next.size()) throw MeshingError("boundary loop is not a single cycle");
    } while (cur != start);
    if (steps != next.size()) throw MeshingError("boundary label forms several loops");
  }

  std::vector<int> gamma = boundary_nodes(BoundaryLabel::GammaFixed);
  std::vector<int> sigma = boundary_nodes(BoundaryLabel::SigmaFree);
  std::set<int> sig_set(sigma.begin(), sigma.end());
  for (int g : gamma)
    if (sig_set.count(g)) throw MeshingError("boundary loops share a node");

  std::vector<Vec2> sig_poly;
  std::map<int, int> next;
  for (const auto& be : boundary_edges)
    if (be.label == BoundaryLabel::SigmaFree) next[be.a] = be.b;
  int cur = next.begin()->first;
  for (size_t i = 0; i < next.size(); ++i) {
    sig_poly.push_back(nodes[cur]);
    cur = next[cur];
  }
  for (int g : gamma)
    if (!inside_polygon(nodes[g], sig_poly))
      throw MeshingError("Gamma loop is not inside the Sigma loop");
}

std::vector<int> Mesh::boundary_nodes(BoundaryLabel label) const {
  std::set<int> s;
  for (const auto& be : boundary_edges)
    if (be.label == label) {
      s.insert(be.a);
      s.insert(be.b);
    }
  return {s.begin(), s.end()};
}

Mesh generate_annulus(double inner_radius, const CurveSpec& outer_curve,
                      int n_inner, int n_outer, double target_h) {
  if (inner_radius <= 0.0) throw GeometryError("inner_radius must be positive");
  if (n_inner < 8 || n_outer < 8) throw GeometryError("need at least 8 nodes per loop");

  const int probe = 2048;
  double min_out = std::numeric_limits<double>::max();
  double mean_out = 0.0;
  for (int k = 0; k < probe; ++k) {
    const double r = outer_curve.radius(2 * kPi * k / probe);
    if (!(r > 0.0)) throw GeometryError("outer curve radius must stay positive");
    min_out = std::min(min_out, r);
    mean_out += r / probe;
  }
  if (min_out <= inner_radius * (1.0 + 1e-9))
    throw GeometryError("outer curve does not strictly enclose the inner circle");

  if (target_h <= 0.0)
    target_h = 0.5 * (2 * kPi * inner_radius / n_inner + 2 * kPi * mean_out / n_outer);

  std::vector<Vec2> pts;
  pts.reserve(n_inner + n_outer);
  for (int k = 0; k < n_inner; ++k) {
    const double phi = 2 * kPi * k / n_inner;
    pts.emplace_back(inner_radius * std::cos(phi), inner_radius * std::sin(phi));
  }
  for (int k = 0; k < n_outer; ++k) pts.push_back(outer_curve.point(2 * kPi * k / n_outer));

  const double mean_gap = mean_out - inner_radius;
  const int rings = std::max(1, static_cast<int>(std::lround(mean_gap / target_h)));
  for (int l = 1; l < rings; ++l) {
    const double t = static_cast<double>(l) / rings;
    const int nl = std::max(8, static_cast<int>(std::lround(n_inner + (n_outer - n_inner) * t)));
    const double stagger = frac(0.6180339887498949 * l);
    for (int k = 0; k < nl; ++k) {
      const double phi = 2 * kPi * (k + stagger) / nl;
      const double r = inner_radius + t * (outer_curve.radius(phi) - inner_radius);
      pts.emplace_back(r * std::cos(phi), r * std::sin(phi));
    }
  }

  Delaunay dt(pts);

  // Keep only triangles whose centroid lies in the annulus.
  std::vector<Vec2> gamma_poly(pts.begin(), pts.begin() + n_inner);
  std::vector<Vec2> sigma_poly(pts.begin() + n_inner, pts.begin() + n_inner + n_outer);
  std::vector<std::array<int, 3>> kept;
  for (const auto& t : dt.tris) {
    const Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
    if (inside_polygon(c, sigma_poly) && !inside_polygon(c, gamma_poly)) kept.push_back(t);
  }

  // The prescribed boundary segments must be edges of the triangulation.
  auto require_edge = [&](int a, int b) {
    std::set<EdgeKey> have;
    for (const auto& t : kept)
      for (int e = 0; e < 3; ++e) have.insert(ekey(t[e], t[(e + 1) % 3]));
    if (have.count(ekey(a, b))) return;
    if (!recover_edge(kept, pts, a, b)) throw MeshingError("failed to recover boundary edge");
  };
  for (int k = 0; k < n_inner; ++k) require_edge(k, (k + 1) % n_inner);
  for (int k = 0; k < n_outer; ++k)
    require_edge(n_inner + k, n_inner + (k + 1) % n_outer);

  Mesh mesh;
  mesh.nodes = pts;
  mesh.triangles = kept;
  for (auto& t : mesh.triangles)
    if (orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) < 0) std::swap(t[1], t[2]);

  // Gamma edges run clockwise, Sigma edges counterclockwise, so the domain
  // sits on the left of both loops.
  for (int k = 0; k < n_inner; ++k)
    mesh.boundary_edges.push_back({(k + 1) % n_inner, k, BoundaryLabel::GammaFixed});
  for (int k = 0; k < n_outer; ++k)
    mesh.boundary_edges.push_back(
        {n_inner + k, n_inner + (k + 1) % n_outer, BoundaryLabel::SigmaFree});

  // A few guarded Laplacian passes on interior nodes.
  std::vector<char> is_boundary(mesh.nodes.size(), 0);
  for (const auto& be : mesh.boundary_edges) is_boundary[be.a] = is_boundary[be.b] = 1;
  std::vector<std::set<int>> nbr(mesh.nodes.size());
  std::vector<std::vector<int>> star(mesh.nodes.size());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
    for (int e = 0; e < 3; ++e) {
      const int a = mesh.triangles[t][e], b = mesh.triangles[t][(e + 1) % 3];
      nbr[a].insert(b);
      nbr[b].insert(a);
      star[a].push_back(t);
    }
  for (int pass = 0; pass < 3; ++pass) {
    for (int v = 0; v < static_cast<int>(mesh.nodes.size()); ++v) {
      if (is_boundary[v] || nbr[v].empty()) continue;
      Vec2 avg = Vec2::Zero();
      for (int w : nbr[v]) avg += mesh.nodes[w];
      avg /= static_cast<double>(nbr[v].size());
      const Vec2 old = mesh.nodes[v];
      mesh.nodes[v] = avg;
      for (int t : star[v])
        if (mesh.signed_area(t) <= 1e-14) {
          mesh.nodes[v] = old;
          break;
        }
    }
  }

  mesh.validate();
  return mesh;
}

Mesh deform(const Mesh& mesh, const DisplacementField& theta, double t) {
  if (theta.values.size() != static_cast<Eigen::Index>(2 * mesh.nodes.size()))
    throw InvertedElementError("displacement field does not match the mesh");
  Mesh out = mesh;
  for (size_t v = 0; v < mesh.nodes.size(); ++v) out.nodes[v] = mesh.nodes[v] + t * theta.at(static_cast<int>(v));
  for (int k = 0; k < static_cast<int>(out.triangles.size()); ++k)
    if (out.signed_area(k) <= 0.0)
      throw InvertedElementError("deformation inverts a triangle; reduce the step");
  return out;
}

Mesh refine_uniform(const Mesh& mesh,
                    const std::function<Vec2(const Vec2&)>* project_sigma,
                    const std::function<Vec2(const Vec2&)>* project_gamma) {
  Mesh out;
  out.nodes = mesh.nodes;
  std::map<EdgeKey, int> mid;
  auto midpoint = [&](int a, int b) {
    const EdgeKey k = ekey(a, b);
    auto it = mid.find(k);
    if (it != mid.end()) return it->second;
    out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    mid[k] = static_cast<int>(out.nodes.size()) - 1;
    return mid[k];
  };
  for (const auto& t : mesh.triangles) {
    const int m01 = midpoint(t[0], t[1]), m12 = midpoint(t[1], t[2]), m20 = midpoint(t[2], t[0]);
    out.triangles.push_back({t[0], m01, m20});
    out.triangles.push_back({t[1], m12, m01});
    out.triangles.push_back({t[2], m20, m12});
    out.triangles.push_back({m01, m12, m20});
  }
  for (const auto& be : mesh.boundary_edges) {
    const int m = midpoint(be.a, be.b);
    const auto* proj =
        be.label == BoundaryLabel::SigmaFree ? project_sigma : project_gamma;
    if (proj) out.nodes[m] = (*proj)(out.nodes[m]);
    out.boundary_edges.push_back({be.a, m, be.label});
    out.boundary_edges.push_back({m, be.b, be.label});
  }
  out.validate();
  return out;
}

BoundaryGeometry boundary_geometry(const Mesh& mesh) {
  BoundaryGeometry g;
  const int ne = static_cast<int>(mesh.boundary_edges.size());
  const int nn = static_cast<int>(mesh.nodes.size());
  g.edge_normal.resize(ne);
  g.edge_tangent.resize(ne);
  g.edge_length.resize(ne);
  g.node_normal.assign(nn, Vec2::Zero());
  g.node_weight.assign(nn, 0.0);
  g.on_sigma.assign(nn, 0);
  g.on_gamma.assign(nn, 0);

  for (int e = 0; e < ne; ++e) {
    const auto& be = mesh.boundary_edges[e];
    const Vec2 d = mesh.nodes[be.b] - mesh.nodes[be.a];
    const double len = d.norm();
    const Vec2 tau = d / len;
    g.edge_length[e] = len;
    g.edge_tangent[e] = tau;
    g.edge_normal[e] = Vec2(tau.y(), -tau.x());  // domain on the left
    g.node_normal[be.a] += g.edge_normal[e];
    g.node_normal[be.b] += g.edge_normal[e];
    g.node_weight[be.a] += 0.5 * len;
    g.node_weight[be.b] += 0.5 * len;
    if (be.label == BoundaryLabel::SigmaFree) {
      g.on_sigma[be.a] = g.on_sigma[be.b] = 1;
      g.sigma_perimeter += len;
    } else {
      g.on_gamma[be.a] = g.on_gamma[be.b] = 1;
      g.gamma_perimeter += len;
    }
  }
  for (int v = 0; v < nn; ++v)
    if (g.on_sigma[v] || g.on_gamma[v]) g.node_normal[v].normalize();
  return g;
}

QualityReport quality(const Mesh& mesh) {
  QualityReport q;
  q.min_radius_ratio = std::numeric_limits<double>::max();
  q.min_area = std::numeric_limits<double>::max();
  q.min_sigma_edge = std::numeric_limits<double>::max();
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tr = mesh.triangles[t];
    const double a = (mesh.nodes[tr[1]] - mesh.nodes[tr[0]]).norm();
    const double b = (mesh.nodes[tr[2]] - mesh.nodes[tr[1]]).norm();
    const double c = (mesh.nodes[tr[0]] - mesh.nodes[tr[2]]).norm();
    const double area = mesh.signed_area(t);
    const double s = 0.5 * (a + b + c);
    const double inr = area / s;
    const double circ = a * b * c / std::max(4.0 * area, 1e-300);
    const double ratio = inr / circ;
    q.min_radius_ratio = std::min(q.min_radius_ratio, ratio);
    q.max_radius_ratio = std::max(q.max_radius_ratio, ratio);
    q.min_area = std::min(q.min_area, area);
  }
  for (const auto& be : mesh.boundary_edges)
    if (be.label == BoundaryLabel::SigmaFree) {
      const double len = (mesh.nodes[be.b] - mesh.nodes[be.a]).norm();
      q.min_sigma_edge = std::min(q.min_sigma_edge, len);
      q.max_sigma_edge = std::max(q.max_sigma_edge, len);
    }
  return q;
}

DisplacementField DisplacementField::sample(const Mesh& mesh,
                                            const std::function<Vec2(const Vec2&)>& f) {
  DisplacementField d;
  d.values.resize(2 * mesh.nodes.size());
  for (size_t v = 0; v < mesh.nodes.size(); ++v) {
    const Vec2 val = f(mesh.nodes[v]);
    d.values[2 * v] = val.x();
    d.values[2 * v + 1] = val.y();
  }
  for (int v : mesh.boundary_nodes(BoundaryLabel::GammaFixed)) {
    d.values[2 * v] = 0.0;
    d.values[2 * v + 1] = 0.0;
  }
  return d;
}

}  // namespace ccbm
