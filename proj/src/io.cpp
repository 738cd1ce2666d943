#include "stagflow/io.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace stagflow {

namespace {

constexpr int kDigits = 17;

std::string next_content_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    const auto p = line.find_first_not_of(" \t\r");
    if (p != std::string::npos && line[p] != '#') return line;
  }
  throw IoError("mesh file: unexpected end of input");
}

int read_count(std::istream& is, const std::string& tag) {
  std::istringstream ls(next_content_line(is));
  std::string t;
  long n = -1;
  if (!(ls >> t >> n) || t != tag || n < 0) throw IoError("mesh file: expected '" + tag + " <count>'");
  return static_cast<int>(n);
}

void write_csv(std::ostream& os, const std::vector<Vec2>& points, const std::vector<Column>& columns) {
  for (const Column& c : columns)
    if (c.second.size() != static_cast<Eigen::Index>(points.size()))
      throw IoError("column '" + c.first + "' has the wrong length");
  os << "entity_id,x,y";
  for (const Column& c : columns) os << ',' << c.first;
  os << '\n' << std::setprecision(kDigits);
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << i << ',' << points[i].x() << ',' << points[i].y();
    for (const Column& c : columns) os << ',' << c.second[static_cast<Eigen::Index>(i)];
    os << '\n';
  }
}

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "quadmesh 2\n" << std::setprecision(kDigits);
  os << "V " << mesh.num_vertices() << '\n';
  for (const Vec2& v : mesh.vertices()) os << v.x() << ' ' << v.y() << '\n';
  os << "C " << mesh.num_cells() << '\n';
  for (const Cell& c : mesh.cells())
    os << c.vertices[0] << ' ' << c.vertices[1] << ' ' << c.vertices[2] << ' ' << c.vertices[3] << '\n';
}

Mesh read_mesh(std::istream& is) {
  {
    std::istringstream ls(next_content_line(is));
    std::string tag;
    int dim = 0;
    if (!(ls >> tag >> dim) || tag != "quadmesh" || dim != 2) throw IoError("mesh file: expected 'quadmesh 2'");
  }
  const int nv = read_count(is, "V");
  std::vector<Vec2> vertices(nv);
  for (int i = 0; i < nv; ++i) {
    std::istringstream ls(next_content_line(is));
    double x, y;
    if (!(ls >> x >> y)) throw IoError("mesh file: bad vertex line " + std::to_string(i));
    vertices[i] = Vec2(x, y);
  }
  const int nc = read_count(is, "C");
  std::vector<std::array<int, 4>> cells(nc);
  for (int k = 0; k < nc; ++k) {
    std::istringstream ls(next_content_line(is));
    for (int& v : cells[k]) {
      if (!(ls >> v)) throw IoError("mesh file: bad cell line " + std::to_string(k));
      if (v < 0 || v >= nv) throw IoError("mesh file: vertex index out of range in cell " + std::to_string(k));
    }
  }
  return Mesh::from_cells(std::move(vertices), std::move(cells));
}

void save_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write_mesh(os, mesh);
}

Mesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  return read_mesh(is);
}

void write_cell_csv(std::ostream& os, const Mesh& mesh, const std::vector<Column>& columns) {
  std::vector<Vec2> pts;
  pts.reserve(mesh.num_cells());
  for (const Cell& c : mesh.cells()) pts.push_back(c.center);
  write_csv(os, pts, columns);
}

void write_face_csv(std::ostream& os, const Mesh& mesh, const std::vector<Column>& columns) {
  std::vector<Vec2> pts;
  pts.reserve(mesh.num_faces());
  for (const Face& f : mesh.faces()) pts.push_back(f.midpoint);
  write_csv(os, pts, columns);
}

Eigen::VectorXd read_csv_column(std::istream& is, const std::string& name, int expected_rows) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("csv: empty input");
  std::vector<std::string> header;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) header.push_back(cell);
  }
  int col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) col = static_cast<int>(i);
  if (col < 0) throw IoError("csv: no column '" + name + "'");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(expected_rows);
  std::vector<bool> seen(expected_rows, false);
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw IoError("csv: ragged row " + std::to_string(rows + 1));
    const int id = std::stoi(cells[0]);
    if (id < 0 || id >= expected_rows || seen[id]) throw IoError("csv: bad entity id " + cells[0]);
    seen[id] = true;
    out[id] = std::stod(cells[col]);
    ++rows;
  }
  if (rows != expected_rows)
    throw IoError("csv: expected " + std::to_string(expected_rows) + " rows, found " + std::to_string(rows));
  return out;
}

void write_state_csv(std::ostream& cells, std::ostream& faces, const Mesh& mesh, const State& state) {
  write_cell_csv(cells, mesh, {{"rho", state.rho.values}, {"p", state.p.values}});
  write_face_csv(faces, mesh, {{"ux", state.u.x}, {"uy", state.u.y}, {"rho_dual", state.rho_dual.values}});
}

void write_flux_csv(std::ostream& os, const Mesh& mesh, const FluxSet& fluxes) {
  os << "cell,local,face,primal_flux,dual_face_from,dual_face_to,dual_flux\n" << std::setprecision(kDigits);
  for (int k = 0; k < mesh.num_cells(); ++k)
    for (int i = 0; i < 4; ++i) {
      const DualFace& d = mesh.dual_face(k, i);
      os << k << ',' << i << ',' << mesh.cell(k).faces[i] << ',' << fluxes.primal_flux(k, i) << ',' << d.face_from
         << ',' << d.face_to << ',' << (fluxes.has_dual() ? fluxes.dual_flux(k, i) : 0.0) << '\n';
    }
}

void write_vtk(std::ostream& os, const Mesh& mesh, const State& state) {
  os << "# vtk DataFile Version 3.0\n";
  os << "stagflow t=" << std::setprecision(kDigits) << state.time << '\n';
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices()) os << v.x() << ' ' << v.y() << " 0\n";
  os << "CELLS " << mesh.num_cells() << ' ' << 5 * mesh.num_cells() << '\n';
  for (const Cell& c : mesh.cells())
    os << "4 " << c.vertices[0] << ' ' << c.vertices[1] << ' ' << c.vertices[2] << ' ' << c.vertices[3] << '\n';
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int k = 0; k < mesh.num_cells(); ++k) os << "9\n";
  os << "CELL_DATA " << mesh.num_cells() << '\n';
  os << "SCALARS rho double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < mesh.num_cells(); ++k) os << state.rho[k] << '\n';
  os << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < mesh.num_cells(); ++k) os << state.p[k] << '\n';
  os << "VECTORS u double\n";
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Vec2 u = cell_average(state.u, mesh, k);
    os << u.x() << ' ' << u.y() << " 0\n";
  }
}

void write_matrix_market(const std::string& path, const SparseMatrix& m) {
  const Eigen::SparseMatrix<double> col = m;
  if (!Eigen::saveMarket(col, path)) throw IoError("cannot write " + path);
}

void write_budget_header(std::ostream& os) {
  os << "step,time,mass,rho_min,rho_max,rho2,upwind_dissipation,rho_time_remainder,kinetic_energy,"
        "dissipation,velocity_remainder,source_work,rho2_max_residual,rho2_min_remainder,ke_max_residual,"
        "ke_min_remainder,ke_global_residual\n";
}

void write_budget_row(std::ostream& os, int step, double time, const BudgetReport& r) {
  os << std::setprecision(kDigits) << step << ',' << time << ',' << r.mass << ',' << r.rho_min << ',' << r.rho_max
     << ',' << r.rho2 << ',' << r.upwind_dissipation << ',' << r.rho_time_remainder << ',' << r.kinetic_energy << ','
     << r.dissipation << ',' << r.velocity_remainder << ',' << r.source_work << ',' << r.rho2_max_residual << ','
     << r.rho2_min_remainder << ',' << r.ke_max_residual << ',' << r.ke_min_remainder << ','
     << r.ke_global_residual << '\n';
}

}  // namespace stagflow
