/// @file fields.hpp
/// @brief Discrete fields on cells and faces, the time-level State, projections
/// of continuous data and the discrete norms.
#pragma once

#include "stagflow/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <stdexcept>

namespace stagflow {

/// Piecewise constant on primal cells (density, pressure).
struct CellScalarField {
  Eigen::VectorXd values;

  CellScalarField() = default;
  explicit CellScalarField(int n, double value = 0.0) : values(Eigen::VectorXd::Constant(n, value)) {}
  explicit CellScalarField(Eigen::VectorXd v) : values(std::move(v)) {}

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int k) const { return values[k]; }
  double& operator[](int k) { return values[k]; }
};

/// Scalar per face (dual densities, upwind face densities).
struct FaceScalarField {
  Eigen::VectorXd values;

  FaceScalarField() = default;
  explicit FaceScalarField(int n, double value = 0.0) : values(Eigen::VectorXd::Constant(n, value)) {}

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int f) const { return values[f]; }
  double& operator[](int f) { return values[f]; }
};

/// 2-vector per face. Members of H_{E,0} carry zero on external faces.
struct FaceVectorField {
  Eigen::VectorXd x, y;

  FaceVectorField() = default;
  explicit FaceVectorField(int n) : x(Eigen::VectorXd::Zero(n)), y(Eigen::VectorXd::Zero(n)) {}

  int size() const { return static_cast<int>(x.size()); }
  Vec2 operator[](int f) const { return {x[f], y[f]}; }
  void set(int f, const Vec2& v) {
    x[f] = v.x();
    y[f] = v.y();
  }

  FaceVectorField& operator+=(const FaceVectorField& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  FaceVectorField& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend FaceVectorField operator+(FaceVectorField a, const FaceVectorField& b) { return a += b; }
  friend FaceVectorField operator-(FaceVectorField a, const FaceVectorField& b) {
    a.x -= b.x;
    a.y -= b.y;
    return a;
  }
  friend FaceVectorField operator*(double s, FaceVectorField a) { return a *= s; }
};

/// Unknowns at one time level, with dual densities cached from rho.
struct State {
  double time = 0.0;
  CellScalarField rho;
  FaceVectorField u;
  CellScalarField p;
  FaceScalarField rho_dual;
};

using ScalarFunction = std::function<double(const Vec2&)>;
using VectorFunction = std::function<Vec2(const Vec2&)>;

/// Cell averages (1/|K|) int_K f.
CellScalarField project_cell(const ScalarFunction& f, const Mesh& mesh);

/// Face averages (1/|sigma|) int_sigma v; external faces are set to zero.
FaceVectorField interpolate_face(const VectorFunction& v, const Mesh& mesh);

/// Face averages on every face, boundary included.
FaceVectorField face_averages(const VectorFunction& v, const Mesh& mesh);

/// |D_sigma| rho_D = sum over the adjacent cells of |K|/4 rho_K.
FaceScalarField dual_density(const CellScalarField& rho, const Mesh& mesh);

/// Builds a state at time t with zero pressure and consistent dual densities.
State make_state(const Mesh& mesh, CellScalarField rho, FaceVectorField u, double t = 0.0);

/// True when every external face carries the zero vector.
bool has_zero_boundary(const FaceVectorField& u, const Mesh& mesh);

/// sum_K |K| p_K.
double weighted_sum(const CellScalarField& p, const Mesh& mesh);

enum class NormKind { L2, Lq, Linf, BrokenH1, FvH1, JumpSeminorm };

class NormError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cell fields support L2, Lq and Linf.
double norm(const CellScalarField& f, NormKind kind, const Mesh& mesh, double q = 2.0);
/// Face vector fields support every kind; Lebesgue norms use the diamond cells.
double norm(const FaceVectorField& u, NormKind kind, const Mesh& mesh, double q = 2.0);

/// Equal-weight face average u_K = sum_sigma xi u_sigma.
Vec2 cell_average(const FaceVectorField& u, const Mesh& mesh, int k);

}  // namespace stagflow
