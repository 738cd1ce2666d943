/// @file mesh.hpp
/// @brief Quadrilateral staggered discretization: primal cells, faces and the
/// diamond dual mesh, plus refinement, perturbation and regularity metrics.
#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagflow {

using Vec2 = Eigen::Vector2d;

/// Number of faces per cell (2d with d = 2).
inline constexpr int kFacesPerCell = 4;
/// Volume fraction of a half-diamond inside its cell, xi = 1/(2d).
inline constexpr double kXi = 0.25;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-convex cell produced by a geometric operation.
class NonConvexCellError : public MeshError {
 public:
  NonConvexCellError(int cell, const std::string& what)
      : MeshError(what), cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

struct Rectangle {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// Local numbering: vertices v0..v3 counter-clockwise map to the reference
/// corners (0,0), (1,0), (1,1), (0,1). Local face i joins v_i and v_{i+1}, so
/// faces 0..3 are the reference faces y=0, x=1, y=1, x=0.
struct Cell {
  std::array<int, 4> vertices{};
  std::array<int, 4> faces{};
  /// +1 if the global face normal points out of this cell, -1 otherwise.
  std::array<double, 4> orientation{};
  Vec2 center = Vec2::Zero();  ///< mass center
  double volume = 0.0;
  double diameter = 0.0;
};

struct Face {
  std::array<int, 2> vertices{};
  int owner = -1;
  int neighbor = -1;  ///< -1 on the boundary
  int owner_local = -1;
  int neighbor_local = -1;
  double measure = 0.0;
  Vec2 midpoint = Vec2::Zero();
  Vec2 normal = Vec2::Zero();  ///< unit normal pointing out of the owner
  double dual_volume = 0.0;    ///< |D_sigma|

  bool is_internal() const { return neighbor >= 0; }
};

/// Dual face epsilon = D_from | D_to interior to one cell: the segment from the
/// cell mass center to local vertex `local_vertex`. It separates the half
/// diamonds of local faces (local_vertex + 3) % 4 and local_vertex.
struct DualFace {
  int cell = -1;
  int local_vertex = -1;
  int face_from = -1;  ///< global face id whose diamond the normal leaves
  int face_to = -1;
  double measure = 0.0;
  Vec2 normal = Vec2::Zero();  ///< unit normal out of D_from
};

/// Immutable staggered discretization D = (M, E).
class Mesh {
 public:
  Mesh() = default;

  /// Builds connectivity and geometry from vertices and CCW cell-vertex lists.
  /// Throws NonConvexCellError if any cell is not strictly convex.
  static Mesh from_cells(std::vector<Vec2> vertices,
                         std::vector<std::array<int, 4>> cells);

  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_dual_faces() const { return static_cast<int>(dual_faces_.size()); }
  int num_internal_faces() const { return num_internal_faces_; }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<DualFace>& dual_faces() const { return dual_faces_; }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const Cell& cell(int k) const { return cells_[k]; }
  const Face& face(int f) const { return faces_[f]; }
  /// Dual face at local vertex i of cell k.
  const DualFace& dual_face(int k, int i) const { return dual_faces_[4 * k + i]; }

  /// |D_{K,sigma}| = |K| / 4.
  double half_diamond_volume(int k) const { return kXi * cells_[k].volume; }
  /// Outward unit normal n_{K,sigma} of local face i of cell k.
  Vec2 outward_normal(int k, int i) const {
    const Cell& c = cells_[k];
    return c.orientation[i] * faces_[c.faces[i]].normal;
  }
  /// The cell on the other side of local face i of k, or -1.
  int across(int k, int i) const;

  double domain_volume() const;
  /// Half-diamond geometry as a triangle (face endpoints and the mass center).
  std::array<Vec2, 3> half_diamond_triangle(int k, int i) const;
  /// Diamond polygon for a face, counter-clockwise.
  std::vector<Vec2> diamond_polygon(int f) const;

  bool operator==(const Mesh& other) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  std::vector<DualFace> dual_faces_;
  int num_internal_faces_ = 0;
};

/// Uniform nx-by-ny rectangular mesh of `domain`.
Mesh build_cartesian(int nx, int ny, const Rectangle& domain = {});

/// Splits every cell in four along the segments joining opposite face midpoints.
Mesh refine(const Mesh& mesh);

/// Displaces interior vertices by up to `magnitude` times the local edge length,
/// deterministically from `seed`. Throws NonConvexCellError on a bad cell.
Mesh perturb(const Mesh& mesh, double magnitude, std::uint64_t seed);

struct RegularityReport {
  double h = 0.0;         ///< max cell diameter
  double alpha = 0.0;     ///< max deviation of opposite normals from antiparallel
  double theta_m = 0.0;   ///< max h_K / r_K
  double theta_e1 = 0.0;  ///< max r_{D_sigma} / h_{D_sigma'} over touching diamonds
  double theta_e2 = 0.0;  ///< max |dD_{K,sigma}| / |dK|
  double theta_e3 = 0.0;  ///< max h_D / r_{D_sigma}
  double theta = 0.0;     ///< max of the four thetas
};

RegularityReport regularity(const Mesh& mesh);

/// Deviation angle alpha_K of one cell from a parallelogram.
double cell_alpha(const Mesh& mesh, int k);

namespace geometry {

double polygon_area(const std::vector<Vec2>& poly);
Vec2 polygon_centroid(const std::vector<Vec2>& poly);
double polygon_perimeter(const std::vector<Vec2>& poly);
double polygon_diameter(const std::vector<Vec2>& poly);
bool is_strictly_convex(const std::vector<Vec2>& poly);
/// Diameter of the largest disc contained in a convex polygon (CCW), solved
/// exactly as the 3-variable linear program max r s.t. dist(c, edge_i) >= r.
double inscribed_diameter(const std::vector<Vec2>& poly);

}  // namespace geometry

}  // namespace stagflow
