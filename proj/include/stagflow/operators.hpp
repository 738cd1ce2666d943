/// @file operators.hpp
/// @brief Discrete divergence and gradient, the parametric Rannacher-Turek
/// element and its diffusion operator.
#pragma once

#include "stagflow/fields.hpp"
#include "stagflow/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <vector>

namespace stagflow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// (div u)_K = (1/|K|) sum_sigma |sigma| u_sigma . n_{K,sigma}.
CellScalarField divergence(const FaceVectorField& u, const Mesh& mesh);

/// (grad p)_sigma = |sigma|/|D_sigma| (p_L - p_K) n_{K,sigma}; zero on the boundary.
FaceVectorField gradient(const CellScalarField& p, const Mesh& mesh);

/// Numbering of internal faces used for velocity unknowns. Component c of
/// face f sits at 2 * index(f) + c.
class FaceDofMap {
 public:
  explicit FaceDofMap(const Mesh& mesh);

  int index(int face) const { return index_[face]; }
  int face(int index) const { return face_[index]; }
  int num_internal() const { return static_cast<int>(face_.size()); }
  int num_velocity_dofs() const { return 2 * num_internal(); }

  Eigen::VectorXd gather(const FaceVectorField& u) const;
  FaceVectorField scatter(const Eigen::VectorXd& v, int num_faces) const;

 private:
  std::vector<int> index_;
  std::vector<int> face_;
};

/// |K|-weighted divergence on internal velocity unknowns: (B u)_K = |K| (div u)_K.
SparseMatrix weighted_divergence_matrix(const Mesh& mesh, const FaceDofMap& dofs);

/// |D_sigma|-weighted gradient on internal velocity unknowns; equals -B^T.
SparseMatrix weighted_gradient_matrix(const Mesh& mesh, const FaceDofMap& dofs);

/// Values and reference gradients of the four Rannacher-Turek shape functions
/// on the unit square, indexed by local face (y=0, x=1, y=1, x=0).
struct ShapeValues {
  std::array<double, 4> value{};
  std::array<Vec2, 4> grad{};
};

/// Coefficients of each shape function in the basis {1, x, y, x^2 - y^2},
/// obtained from the face-mean moment system.
const Eigen::Matrix4d& rt_coefficients();

ShapeValues rt_shape(double xi, double eta);

/// Element stiffness int_K grad zeta_j . grad zeta_i, parametric map, 3x3 Gauss.
Eigen::Matrix4d cell_stiffness(const Mesh& mesh, int k);

/// Scalar stiffness over all faces, no boundary treatment.
SparseMatrix assemble_stiffness(const Mesh& mesh);

struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = false;
};

/// Stiffness form over face DoFs with external rows and columns replaced by
/// identity (u_sigma = 0 on the boundary).
SparseOperator assemble_diffusion(const Mesh& mesh);

/// Value of the finite element reconstruction of u inside cell k at a
/// reference point.
Vec2 reconstruct(const FaceVectorField& u, const Mesh& mesh, int k, double xi, double eta);

/// Per-face integrals of the jump of the reconstruction. On external faces the
/// jump is the inner trace.
struct JumpIntegrals {
  std::vector<Vec2> mean;        ///< int_sigma [u]
  std::vector<double> squared;   ///< int_sigma |[u]|^2
};

JumpIntegrals jump_integrals(const FaceVectorField& u, const Mesh& mesh);

}  // namespace stagflow
