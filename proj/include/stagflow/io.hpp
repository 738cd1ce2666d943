/// @file io.hpp
/// @brief Mesh text files, CSV field dumps, VTK legacy output and Matrix Market export.
#pragma once

#include "stagflow/diagnostics.hpp"
#include "stagflow/fields.hpp"
#include "stagflow/fluxes.hpp"
#include "stagflow/mesh.hpp"
#include "stagflow/operators.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stagflow {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Format:
///   quadmesh 2
///   V <n>        followed by n lines "x y"
///   C <m>        followed by m lines of 4 counter-clockwise vertex indices
/// Coordinates are written with 17 significant digits, so a round trip is exact.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
void save_mesh(const std::string& path, const Mesh& mesh);
Mesh load_mesh(const std::string& path);

/// Named column over cells or faces.
using Column = std::pair<std::string, Eigen::VectorXd>;

/// "entity_id,x,y,<names>" with one row per cell (x, y the mass center).
void write_cell_csv(std::ostream& os, const Mesh& mesh, const std::vector<Column>& columns);
/// Same with one row per face (x, y the midpoint).
void write_face_csv(std::ostream& os, const Mesh& mesh, const std::vector<Column>& columns);

/// Reads a CSV written by the functions above and returns the named column,
/// checking the entity count.
Eigen::VectorXd read_csv_column(std::istream& is, const std::string& name, int expected_rows);

/// rho and p per cell, u per face.
void write_state_csv(std::ostream& cells, std::ostream& faces, const Mesh& mesh, const State& state);

/// Primal and dual fluxes per (cell, local index).
void write_flux_csv(std::ostream& os, const Mesh& mesh, const FluxSet& fluxes);

/// VTK legacy ASCII unstructured grid of quads with cell data rho, p and the
/// cell average of u.
void write_vtk(std::ostream& os, const Mesh& mesh, const State& state);

/// Matrix Market coordinate file.
void write_matrix_market(const std::string& path, const SparseMatrix& m);

/// One CSV line per step with the global budget tallies.
void write_budget_header(std::ostream& os);
void write_budget_row(std::ostream& os, int step, double time, const BudgetReport& report);

}  // namespace stagflow
