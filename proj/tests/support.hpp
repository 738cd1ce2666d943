#pragma once

#include "stagflow/fields.hpp"
#include "stagflow/mesh.hpp"

#include <random>

namespace stagflow::testing {

struct Random {
  std::mt19937_64 rng;
  explicit Random(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

  CellScalarField cells(const Mesh& mesh, double lo = -1.0, double hi = 1.0) {
    CellScalarField r(mesh.num_cells());
    for (int k = 0; k < mesh.num_cells(); ++k) r[k] = uniform(lo, hi);
    return r;
  }
  CellScalarField density(const Mesh& mesh) { return cells(mesh, 1.0, 3.0); }

  FaceVectorField velocity(const Mesh& mesh) {
    FaceVectorField u(mesh.num_faces());
    for (int f = 0; f < mesh.num_faces(); ++f)
      if (mesh.face(f).is_internal()) u.set(f, Vec2(uniform(), uniform()));
    return u;
  }
};

inline Mesh perturbed(int n, double magnitude = 0.2, std::uint64_t seed = 3) {
  return perturb(build_cartesian(n, n), magnitude, seed);
}

inline double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline int find_face(const Mesh& mesh, const Vec2& midpoint) {
  for (int f = 0; f < mesh.num_faces(); ++f)
    if ((mesh.face(f).midpoint - midpoint).norm() < 1e-12) return f;
  return -1;
}

}  // namespace stagflow::testing
