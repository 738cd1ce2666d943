#include "stagflow/operators.hpp"

#include "stagflow/quadrature.hpp"

#include <Eigen/Dense>

namespace stagflow {

CellScalarField divergence(const FaceVectorField& u, const Mesh& mesh) {
  CellScalarField out(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Cell& c = mesh.cell(k);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += mesh.face(c.faces[i]).measure * u[c.faces[i]].dot(mesh.outward_normal(k, i));
    out[k] = s / c.volume;
  }
  return out;
}

FaceVectorField gradient(const CellScalarField& p, const Mesh& mesh) {
  FaceVectorField out(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.is_internal()) continue;
    out.set(f, fc.measure / fc.dual_volume * (p[fc.neighbor] - p[fc.owner]) * fc.normal);
  }
  return out;
}

FaceDofMap::FaceDofMap(const Mesh& mesh) : index_(mesh.num_faces(), -1) {
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (mesh.face(f).is_internal()) {
      index_[f] = static_cast<int>(face_.size());
      face_.push_back(f);
    }
}

Eigen::VectorXd FaceDofMap::gather(const FaceVectorField& u) const {
  Eigen::VectorXd v(num_velocity_dofs());
  for (int i = 0; i < num_internal(); ++i) {
    v[2 * i] = u.x[face_[i]];
    v[2 * i + 1] = u.y[face_[i]];
  }
  return v;
}

FaceVectorField FaceDofMap::scatter(const Eigen::VectorXd& v, int num_faces) const {
  FaceVectorField u(num_faces);
  for (int i = 0; i < num_internal(); ++i) {
    u.x[face_[i]] = v[2 * i];
    u.y[face_[i]] = v[2 * i + 1];
  }
  return u;
}

SparseMatrix weighted_divergence_matrix(const Mesh& mesh, const FaceDofMap& dofs) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(8 * mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Cell& c = mesh.cell(k);
    for (int i = 0; i < 4; ++i) {
      const int idx = dofs.index(c.faces[i]);
      if (idx < 0) continue;
      const Vec2 n = mesh.face(c.faces[i]).measure * mesh.outward_normal(k, i);
      t.emplace_back(k, 2 * idx, n.x());
      t.emplace_back(k, 2 * idx + 1, n.y());
    }
  }
  SparseMatrix b(mesh.num_cells(), dofs.num_velocity_dofs());
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

SparseMatrix weighted_gradient_matrix(const Mesh& mesh, const FaceDofMap& dofs) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * dofs.num_internal());
  for (int i = 0; i < dofs.num_internal(); ++i) {
    const Face& fc = mesh.face(dofs.face(i));
    const Vec2 n = fc.measure * fc.normal;
    for (int c = 0; c < 2; ++c) {
      t.emplace_back(2 * i + c, fc.neighbor, n[c]);
      t.emplace_back(2 * i + c, fc.owner, -n[c]);
    }
  }
  SparseMatrix g(dofs.num_velocity_dofs(), mesh.num_cells());
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

const Eigen::Matrix4d& rt_coefficients() {
  static const Eigen::Matrix4d coeffs = [] {
    // Row j: face means of (1, x, y, x^2 - y^2) on reference face j.
    Eigen::Matrix4d moments;
    moments << 1.0, 0.5, 0.0, 1.0 / 3.0,   // y = 0
        1.0, 1.0, 0.5, 2.0 / 3.0,          // x = 1
        1.0, 0.5, 1.0, -2.0 / 3.0,         // y = 1
        1.0, 0.0, 0.5, -1.0 / 3.0;         // x = 0
    // Row i of the result holds the coefficients of zeta_i:
    // moments * coeffs^T = I.
    return Eigen::Matrix4d(moments.inverse().transpose());
  }();
  return coeffs;
}

ShapeValues rt_shape(double xi, double eta) {
  const Eigen::Matrix4d& c = rt_coefficients();
  ShapeValues s;
  for (int i = 0; i < 4; ++i) {
    s.value[i] = c(i, 0) + c(i, 1) * xi + c(i, 2) * eta + c(i, 3) * (xi * xi - eta * eta);
    s.grad[i] = Vec2(c(i, 1) + 2.0 * c(i, 3) * xi, c(i, 2) - 2.0 * c(i, 3) * eta);
  }
  return s;
}

Eigen::Matrix4d cell_stiffness(const Mesh& mesh, int k) {
  const quad::BilinearMap map(mesh, k);
  return quad::integrate_cell(mesh, k, [&](const Vec2&, double xi, double eta) {
    const ShapeValues s = rt_shape(xi, eta);
    const Eigen::Matrix2d jinv_t = map.jacobian(xi, eta).inverse().transpose();
    Eigen::Matrix<double, 2, 4> g;
    for (int i = 0; i < 4; ++i) g.col(i) = jinv_t * s.grad[i];
    return Eigen::Matrix4d(g.transpose() * g);
  });
}

SparseMatrix assemble_stiffness(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(16 * mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Eigen::Matrix4d a = cell_stiffness(mesh, k);
    const auto& f = mesh.cell(k).faces;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) t.emplace_back(f[i], f[j], a(i, j));
  }
  SparseMatrix m(mesh.num_faces(), mesh.num_faces());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseOperator assemble_diffusion(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(16 * mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Eigen::Matrix4d a = cell_stiffness(mesh, k);
    const auto& f = mesh.cell(k).faces;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (mesh.face(f[i]).is_internal() && mesh.face(f[j]).is_internal()) t.emplace_back(f[i], f[j], a(i, j));
  }
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (!mesh.face(f).is_internal()) t.emplace_back(f, f, 1.0);
  SparseOperator op;
  op.matrix.resize(mesh.num_faces(), mesh.num_faces());
  op.matrix.setFromTriplets(t.begin(), t.end());
  op.symmetric = true;
  return op;
}

Vec2 reconstruct(const FaceVectorField& u, const Mesh& mesh, int k, double xi, double eta) {
  const ShapeValues s = rt_shape(xi, eta);
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < 4; ++i) v += s.value[i] * u[mesh.cell(k).faces[i]];
  return v;
}

namespace {

// Reference corners in local vertex order.
const std::array<Vec2, 4> kCorners{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};

// Reference point on local face i at parameter t from local vertex i.
Vec2 face_point(int i, double t) { return (1.0 - t) * kCorners[i] + t * kCorners[(i + 1) % 4]; }

}  // namespace

JumpIntegrals jump_integrals(const FaceVectorField& u, const Mesh& mesh) {
  JumpIntegrals out;
  out.mean.assign(mesh.num_faces(), Vec2::Zero());
  out.squared.assign(mesh.num_faces(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    for (int q = 0; q < 3; ++q) {
      // Owner traverses the face from vertices[0] to vertices[1]; the
      // neighbor traverses it backwards.
      const double t = quad::kGauss3.points[q];
      const Vec2 po = face_point(fc.owner_local, t);
      Vec2 jump = reconstruct(u, mesh, fc.owner, po.x(), po.y());
      if (fc.is_internal()) {
        const Vec2 pn = face_point(fc.neighbor_local, 1.0 - t);
        jump = reconstruct(u, mesh, fc.neighbor, pn.x(), pn.y()) - jump;
      }
      const double w = quad::kGauss3.weights[q] * fc.measure;
      out.mean[f] += w * jump;
      out.squared[f] += w * jump.squaredNorm();
    }
  }
  return out;
}

}  // namespace stagflow
