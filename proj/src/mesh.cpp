#include "stagflow/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace stagflow {

namespace geometry {

namespace {
double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
}  // namespace

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& poly) {
  // Shift to the first vertex to limit cancellation.
  const Vec2 o = poly.front();
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i] - o;
    const Vec2 q = poly[(i + 1) % n] - o;
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  return o + c / (3.0 * a);
}

double polygon_perimeter(const std::vector<Vec2>& poly) {
  double p = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) p += (poly[(i + 1) % poly.size()] - poly[i]).norm();
  return p;
}

double polygon_diameter(const std::vector<Vec2>& poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, (poly[i] - poly[j]).norm());
  return d;
}

bool is_strictly_convex(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = poly[(i + 1) % n] - poly[i];
    const Vec2 e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
    if (cross(e0, e1) <= 1e-14 * e0.norm() * e1.norm()) return false;
  }
  return true;
}

double inscribed_diameter(const std::vector<Vec2>& poly) {
  // Constraints a_i . c - r >= a_i . p_i with a_i the inward unit normal of
  // edge i. The optimum of the LP sits on a vertex of the feasible region,
  // i.e. on three active constraints; enumerate them.
  const std::size_t n = poly.size();
  std::vector<Vec2> a(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = poly[(i + 1) % n] - poly[i];
    a[i] = Vec2(-e.y(), e.x()).normalized();
    b[i] = a[i].dot(poly[i]);
  }
  const double scale = polygon_diameter(poly);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        Eigen::Matrix3d m;
        m << a[i].x(), a[i].y(), -1.0, a[j].x(), a[j].y(), -1.0, a[k].x(), a[k].y(), -1.0;
        const Eigen::Vector3d rhs(b[i], b[j], b[k]);
        Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
        if (!lu.isInvertible()) continue;
        const Eigen::Vector3d s = lu.solve(rhs);
        const Vec2 c(s[0], s[1]);
        const double r = s[2];
        if (r <= best) continue;
        bool feasible = true;
        for (std::size_t q = 0; q < n && feasible; ++q)
          feasible = a[q].dot(c) - r >= b[q] - 1e-12 * scale;
        if (feasible) best = r;
      }
  return 2.0 * best;
}

}  // namespace geometry

namespace {

std::vector<Vec2> cell_polygon(const std::vector<Vec2>& v, const std::array<int, 4>& ids) {
  return {v[ids[0]], v[ids[1]], v[ids[2]], v[ids[3]]};
}

}  // namespace

Mesh Mesh::from_cells(std::vector<Vec2> vertices, std::vector<std::array<int, 4>> cells) {
  Mesh m;
  m.vertices_ = std::move(vertices);
  m.cells_.resize(cells.size());

  std::map<std::pair<int, int>, int> face_of_edge;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    Cell& c = m.cells_[k];
    c.vertices = cells[k];
    for (int id : c.vertices)
      if (id < 0 || id >= static_cast<int>(m.vertices_.size()))
        throw MeshError("cell " + std::to_string(k) + " references an unknown vertex");
    const auto poly = cell_polygon(m.vertices_, c.vertices);
    c.volume = geometry::polygon_area(poly);
    if (c.volume <= 0.0 || !geometry::is_strictly_convex(poly))
      throw NonConvexCellError(static_cast<int>(k),
                               "cell " + std::to_string(k) + " is not a convex counter-clockwise quadrilateral");
    c.center = geometry::polygon_centroid(poly);
    c.diameter = geometry::polygon_diameter(poly);

    for (int i = 0; i < 4; ++i) {
      const int a = c.vertices[i];
      const int b = c.vertices[(i + 1) % 4];
      const auto key = std::minmax(a, b);
      auto it = face_of_edge.find(key);
      if (it == face_of_edge.end()) {
        Face f;
        f.vertices = {a, b};
        f.owner = static_cast<int>(k);
        f.owner_local = i;
        const Vec2 e = m.vertices_[b] - m.vertices_[a];
        f.measure = e.norm();
        f.midpoint = 0.5 * (m.vertices_[a] + m.vertices_[b]);
        f.normal = Vec2(e.y(), -e.x()) / f.measure;
        face_of_edge.emplace(key, static_cast<int>(m.faces_.size()));
        c.faces[i] = static_cast<int>(m.faces_.size());
        c.orientation[i] = 1.0;
        m.faces_.push_back(f);
      } else {
        Face& f = m.faces_[it->second];
        if (f.neighbor >= 0)
          throw MeshError("face shared by more than two cells at cell " + std::to_string(k));
        if (f.vertices[0] != b || f.vertices[1] != a)
          throw MeshError("inconsistent cell orientation at cell " + std::to_string(k));
        f.neighbor = static_cast<int>(k);
        f.neighbor_local = i;
        c.faces[i] = it->second;
        c.orientation[i] = -1.0;
      }
    }
  }

  for (Face& f : m.faces_) {
    f.dual_volume = m.half_diamond_volume(f.owner);
    if (f.is_internal()) {
      f.dual_volume += m.half_diamond_volume(f.neighbor);
      ++m.num_internal_faces_;
    }
  }

  m.dual_faces_.resize(4 * cells.size());
  for (int k = 0; k < m.num_cells(); ++k) {
    const Cell& c = m.cells_[k];
    for (int i = 0; i < 4; ++i) {
      DualFace& e = m.dual_faces_[4 * k + i];
      e.cell = k;
      e.local_vertex = i;
      e.face_from = c.faces[(i + 3) % 4];
      e.face_to = c.faces[i];
      const Vec2 d = m.vertices_[c.vertices[i]] - c.center;
      e.measure = d.norm();
      e.normal = Vec2(-d.y(), d.x()) / e.measure;
    }
  }
  return m;
}

int Mesh::across(int k, int i) const {
  const Face& f = faces_[cells_[k].faces[i]];
  return f.owner == k ? f.neighbor : f.owner;
}

double Mesh::domain_volume() const {
  double v = 0.0;
  for (const Cell& c : cells_) v += c.volume;
  return v;
}

std::array<Vec2, 3> Mesh::half_diamond_triangle(int k, int i) const {
  const Cell& c = cells_[k];
  return {vertices_[c.vertices[i]], vertices_[c.vertices[(i + 1) % 4]], c.center};
}

std::vector<Vec2> Mesh::diamond_polygon(int f) const {
  const Face& fc = faces_[f];
  const Vec2& a = vertices_[fc.vertices[0]];
  const Vec2& b = vertices_[fc.vertices[1]];
  if (!fc.is_internal()) return {a, b, cells_[fc.owner].center};
  return {a, cells_[fc.neighbor].center, b, cells_[fc.owner].center};
}

bool Mesh::operator==(const Mesh& other) const {
  if (vertices_.size() != other.vertices_.size() || cells_.size() != other.cells_.size()) return false;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i] != other.vertices_[i]) return false;
  for (std::size_t k = 0; k < cells_.size(); ++k)
    if (cells_[k].vertices != other.cells_[k].vertices) return false;
  return true;
}

Mesh build_cartesian(int nx, int ny, const Rectangle& domain) {
  if (nx < 1 || ny < 1) throw MeshError("cartesian mesh needs nx, ny >= 1");
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
    throw MeshError("degenerate domain rectangle");
  std::vector<Vec2> v;
  v.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      v.emplace_back(domain.x0 + (domain.x1 - domain.x0) * i / nx,
                     domain.y0 + (domain.y1 - domain.y0) * j / ny);
  std::vector<std::array<int, 4>> cells;
  cells.reserve(nx * ny);
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return Mesh::from_cells(std::move(v), std::move(cells));
}

Mesh refine(const Mesh& mesh) {
  std::vector<Vec2> v = mesh.vertices();
  std::vector<int> mid(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    mid[f] = static_cast<int>(v.size());
    v.push_back(mesh.face(f).midpoint);
  }
  std::vector<std::array<int, 4>> cells;
  cells.reserve(4 * mesh.num_cells());
  for (const Cell& c : mesh.cells()) {
    const int center = static_cast<int>(v.size());
    v.push_back(0.25 * (mesh.vertex(c.vertices[0]) + mesh.vertex(c.vertices[1]) +
                        mesh.vertex(c.vertices[2]) + mesh.vertex(c.vertices[3])));
    const auto& vv = c.vertices;
    const std::array<int, 4> m{mid[c.faces[0]], mid[c.faces[1]], mid[c.faces[2]], mid[c.faces[3]]};
    cells.push_back({vv[0], m[0], center, m[3]});
    cells.push_back({m[0], vv[1], m[1], center});
    cells.push_back({center, m[1], vv[2], m[2]});
    cells.push_back({m[3], center, m[2], vv[3]});
  }
  return Mesh::from_cells(std::move(v), std::move(cells));
}

Mesh perturb(const Mesh& mesh, double magnitude, std::uint64_t seed) {
  if (magnitude < 0.0) throw MeshError("perturbation magnitude must be nonnegative");
  std::vector<bool> on_boundary(mesh.num_vertices(), false);
  std::vector<double> local_h(mesh.num_vertices(), std::numeric_limits<double>::infinity());
  for (const Face& f : mesh.faces()) {
    for (int v : f.vertices) local_h[v] = std::min(local_h[v], f.measure);
    if (!f.is_internal()) on_boundary[f.vertices[0]] = on_boundary[f.vertices[1]] = true;
  }
  std::vector<Vec2> v = mesh.vertices();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    // Draw for every vertex so the sequence does not depend on boundary layout.
    const double dx = unit(rng);
    const double dy = unit(rng);
    if (on_boundary[i] || magnitude == 0.0) continue;
    v[i] += magnitude * local_h[i] * Vec2(dx, dy);
  }
  std::vector<std::array<int, 4>> cells;
  cells.reserve(mesh.num_cells());
  for (const Cell& c : mesh.cells()) cells.push_back(c.vertices);
  return Mesh::from_cells(std::move(v), std::move(cells));
}

double cell_alpha(const Mesh& mesh, int k) {
  double alpha = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Vec2 n0 = mesh.outward_normal(k, i);
    const Vec2 n1 = mesh.outward_normal(k, i + 2);
    // Angle between n0 and -n1; zero for parallel opposite faces.
    const double c = std::clamp(-n0.dot(n1), -1.0, 1.0);
    alpha = std::max(alpha, std::acos(c));
  }
  return alpha;
}

RegularityReport regularity(const Mesh& mesh) {
  RegularityReport r;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Cell& c = mesh.cell(k);
    const auto poly = cell_polygon(mesh.vertices(), c.vertices);
    r.h = std::max(r.h, c.diameter);
    r.alpha = std::max(r.alpha, cell_alpha(mesh, k));
    r.theta_m = std::max(r.theta_m, c.diameter / geometry::inscribed_diameter(poly));
    const double perimeter = geometry::polygon_perimeter(poly);
    for (int i = 0; i < 4; ++i) {
      const auto t = mesh.half_diamond_triangle(k, i);
      r.theta_e2 = std::max(r.theta_e2, geometry::polygon_perimeter({t[0], t[1], t[2]}) / perimeter);
    }
  }

  std::vector<double> rd(mesh.num_faces()), hd(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto poly = mesh.diamond_polygon(f);
    hd[f] = geometry::polygon_diameter(poly);
    if (geometry::is_strictly_convex(poly)) {
      rd[f] = geometry::inscribed_diameter(poly);
    } else {
      // Non-convex diamond: the best disc inside either half-diamond.
      const Face& fc = mesh.face(f);
      const auto t0 = mesh.half_diamond_triangle(fc.owner, fc.owner_local);
      rd[f] = geometry::inscribed_diameter({t0[0], t0[1], t0[2]});
      if (fc.is_internal()) {
        const auto t1 = mesh.half_diamond_triangle(fc.neighbor, fc.neighbor_local);
        rd[f] = std::max(rd[f], geometry::inscribed_diameter({t1[0], t1[1], t1[2]}));
      }
    }
  }
  for (int f = 0; f < mesh.num_faces(); ++f) r.theta_e3 = std::max(r.theta_e3, r.h / rd[f]);

  // Diamonds touch when their faces share a vertex or lie in a common cell.
  std::vector<std::vector<int>> groups(mesh.num_vertices());
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int v : mesh.face(f).vertices) groups[v].push_back(f);
  for (const Cell& c : mesh.cells()) groups.emplace_back(c.faces.begin(), c.faces.end());
  for (const auto& g : groups) {
    if (g.empty()) continue;
    double rmax = 0.0, hmin = std::numeric_limits<double>::infinity();
    for (int f : g) {
      rmax = std::max(rmax, rd[f]);
      hmin = std::min(hmin, hd[f]);
    }
    r.theta_e1 = std::max(r.theta_e1, rmax / hmin);
  }
  r.theta = std::max({r.theta_m, r.theta_e1, r.theta_e2, r.theta_e3});
  return r;
}

}  // namespace stagflow
