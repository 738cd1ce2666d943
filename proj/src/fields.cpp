#include "stagflow/fields.hpp"

#include "stagflow/operators.hpp"
#include "stagflow/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace stagflow {

CellScalarField project_cell(const ScalarFunction& f, const Mesh& mesh) {
  CellScalarField out(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k)
    out[k] = quad::integrate_cell(mesh, k, [&](const Vec2& x, double, double) { return f(x); }) /
             mesh.cell(k).volume;
  return out;
}

FaceVectorField face_averages(const VectorFunction& v, const Mesh& mesh) {
  FaceVectorField out(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    const Vec2 avg = quad::integrate_segment(mesh.vertex(fc.vertices[0]), mesh.vertex(fc.vertices[1]),
                                             [&](const Vec2& x) -> Vec2 { return v(x); }) /
                     fc.measure;
    out.set(f, avg);
  }
  return out;
}

FaceVectorField interpolate_face(const VectorFunction& v, const Mesh& mesh) {
  FaceVectorField out = face_averages(v, mesh);
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (!mesh.face(f).is_internal()) out.set(f, Vec2::Zero());
  return out;
}

FaceScalarField dual_density(const CellScalarField& rho, const Mesh& mesh) {
  FaceScalarField out(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.is_internal()) {
      out[f] = rho[fc.owner];
      continue;
    }
    out[f] = (mesh.half_diamond_volume(fc.owner) * rho[fc.owner] +
              mesh.half_diamond_volume(fc.neighbor) * rho[fc.neighbor]) /
             fc.dual_volume;
  }
  return out;
}

State make_state(const Mesh& mesh, CellScalarField rho, FaceVectorField u, double t) {
  State s;
  s.time = t;
  s.rho_dual = dual_density(rho, mesh);
  s.rho = std::move(rho);
  s.u = std::move(u);
  s.p = CellScalarField(mesh.num_cells());
  return s;
}

bool has_zero_boundary(const FaceVectorField& u, const Mesh& mesh) {
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (!mesh.face(f).is_internal() && (u.x[f] != 0.0 || u.y[f] != 0.0)) return false;
  return true;
}

double weighted_sum(const CellScalarField& p, const Mesh& mesh) {
  double s = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) s += mesh.cell(k).volume * p[k];
  return s;
}

Vec2 cell_average(const FaceVectorField& u, const Mesh& mesh, int k) {
  Vec2 s = Vec2::Zero();
  for (int f : mesh.cell(k).faces) s += kXi * u[f];
  return s;
}

namespace {

double broken_h1_squared(const FaceVectorField& u, const Mesh& mesh) {
  double total = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Cell& c = mesh.cell(k);
    const quad::BilinearMap map(mesh, k);
    total += quad::integrate_cell(mesh, k, [&](const Vec2&, double xi, double eta) {
      const ShapeValues s = rt_shape(xi, eta);
      const Eigen::Matrix2d jinv_t = map.jacobian(xi, eta).inverse().transpose();
      Eigen::Matrix2d g = Eigen::Matrix2d::Zero();  // rows: components
      for (int i = 0; i < 4; ++i) {
        const Vec2 gi = jinv_t * s.grad[i];
        g.row(0) += u.x[c.faces[i]] * gi.transpose();
        g.row(1) += u.y[c.faces[i]] * gi.transpose();
      }
      return g.squaredNorm();
    });
  }
  return total;
}

}  // namespace

double norm(const CellScalarField& f, NormKind kind, const Mesh& mesh, double q) {
  switch (kind) {
    case NormKind::L2:
      q = 2.0;
      [[fallthrough]];
    case NormKind::Lq: {
      if (q < 1.0) throw NormError("Lq norm needs q >= 1");
      double s = 0.0;
      for (int k = 0; k < mesh.num_cells(); ++k) s += mesh.cell(k).volume * std::pow(std::abs(f[k]), q);
      return std::pow(s, 1.0 / q);
    }
    case NormKind::Linf:
      return f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;
    default:
      throw NormError("H1-type norms need a face vector field");
  }
}

double norm(const FaceVectorField& u, NormKind kind, const Mesh& mesh, double q) {
  switch (kind) {
    case NormKind::L2:
      q = 2.0;
      [[fallthrough]];
    case NormKind::Lq: {
      if (q < 1.0) throw NormError("Lq norm needs q >= 1");
      double s = 0.0;
      for (int f = 0; f < mesh.num_faces(); ++f) s += mesh.face(f).dual_volume * std::pow(u[f].norm(), q);
      return std::pow(s, 1.0 / q);
    }
    case NormKind::Linf: {
      double m = 0.0;
      for (int f = 0; f < u.size(); ++f) m = std::max(m, u[f].norm());
      return m;
    }
    case NormKind::BrokenH1:
      return std::sqrt(broken_h1_squared(u, mesh));
    case NormKind::FvH1: {
      // h_K^{d-2} = 1 in two dimensions.
      double s = 0.0;
      for (const Cell& c : mesh.cells())
        for (int a : c.faces)
          for (int b : c.faces) s += (u[a] - u[b]).squaredNorm();
      return std::sqrt(s);
    }
    case NormKind::JumpSeminorm: {
      const JumpIntegrals j = jump_integrals(u, mesh);
      double s = 0.0;
      for (int f = 0; f < mesh.num_faces(); ++f) s += j.squared[f] / mesh.face(f).measure;
      return std::sqrt(s);
    }
  }
  throw NormError("unknown norm kind");
}

}  // namespace stagflow
