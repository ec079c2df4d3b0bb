#include "ccbm/vtk_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ccbm {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_vertex_vector(std::ofstream& out, const std::string& name, int n_vertices,
                         const Eigen::VectorXcd& u, bool imag_part) {
  out << "VECTORS " << name << " double\n";
  for (int v = 0; v < n_vertices; ++v) {
    const double x = imag_part ? u[2 * v].imag() : u[2 * v].real();
    const double y = imag_part ? u[2 * v + 1].imag() : u[2 * v + 1].real();
    out << num(x) << " " << num(y) << " 0\n";
  }
}

void write_vertex_scalar(std::ofstream& out, const std::string& name, int n_vertices,
                         const Eigen::VectorXcd& p, bool imag_part) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < n_vertices; ++v)
    out << num(imag_part ? p[v].imag() : p[v].real()) << "\n";
}

}  // namespace

void export_vtk(const Mesh& mesh, const VtkFields& fields, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");

  const int nv = static_cast<int>(mesh.nodes.size());
  const int nt = static_cast<int>(mesh.triangles.size());
  const int nb = static_cast<int>(mesh.boundary_edges.size());

  out << "# vtk DataFile Version 3.0\n";
  out << "stokes free-boundary fields\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const Vec2& p : mesh.nodes) out << num(p.x()) << " " << num(p.y()) << " 0\n";

  out << "CELLS " << nt + nb << " " << 4 * nt + 3 * nb << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto& e : mesh.boundary_edges) out << "2 " << e.a << " " << e.b << "\n";
  out << "CELL_TYPES " << nt + nb << "\n";
  for (int i = 0; i < nt; ++i) out << "5\n";
  for (int i = 0; i < nb; ++i) out << "3\n";

  out << "CELL_DATA " << nt + nb << "\n";
  out << "SCALARS boundary_label int 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < nt; ++i) out << "0\n";
  for (const auto& e : mesh.boundary_edges)
    out << (e.label == BoundaryLabel::GammaFixed ? 1 : 2) << "\n";

  const bool any_points = fields.state || fields.adjoint || fields.g_sigma;
  if (any_points) out << "POINT_DATA " << nv << "\n";
  if (fields.state) {
    write_vertex_vector(out, "u_r", nv, fields.state->u, false);
    write_vertex_vector(out, "u_i", nv, fields.state->u, true);
    write_vertex_scalar(out, "p_r", nv, fields.state->p, false);
    write_vertex_scalar(out, "p_i", nv, fields.state->p, true);
  }
  if (fields.adjoint) {
    write_vertex_vector(out, "v_r", nv, fields.adjoint->u, false);
    write_vertex_vector(out, "v_i", nv, fields.adjoint->u, true);
    write_vertex_scalar(out, "q_r", nv, fields.adjoint->p, false);
    write_vertex_scalar(out, "q_i", nv, fields.adjoint->p, true);
  }
  if (fields.g_sigma) {
    out << "SCALARS g_sigma double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < nv; ++v) out << num((*fields.g_sigma)[v]) << "\n";
  }
  if (!out) throw IoError("failed while writing " + path);
}

Mesh read_vtk_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Mesh mesh;
  std::string line;
  int n_cells = 0;
  std::vector<std::vector<int>> cells;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "POINTS") {
      int n = 0;
      ss >> n;
      mesh.nodes.resize(n);
      for (int i = 0; i < n; ++i) {
        double x, y, z;
        in >> x >> y >> z;
        mesh.nodes[i] = Vec2(x, y);
      }
    } else if (tok == "CELLS") {
      ss >> n_cells;
      for (int i = 0; i < n_cells; ++i) {
        int k;
        in >> k;
        std::vector<int> cell(k);
        for (int& v : cell) in >> v;
        cells.push_back(cell);
      }
    } else if (tok == "SCALARS") {
      std::string name;
      ss >> name;
      if (name != "boundary_label") continue;
      std::getline(in, line);  // LOOKUP_TABLE
      labels.resize(n_cells);
      for (int i = 0; i < n_cells; ++i) in >> labels[i];
    }
  }
  for (size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].size() == 3)
      mesh.triangles.push_back({cells[i][0], cells[i][1], cells[i][2]});
    else if (cells[i].size() == 2 && i < labels.size())
      mesh.boundary_edges.push_back(
          {cells[i][0], cells[i][1],
           labels[i] == 1 ? BoundaryLabel::GammaFixed : BoundaryLabel::SigmaFree});
  }
  return mesh;
}

}  // namespace ccbm
