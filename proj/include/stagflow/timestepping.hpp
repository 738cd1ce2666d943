/// @file timestepping.hpp
/// @brief Time advancement: fully implicit (Picard), semi-implicit, explicit
/// with implicit pressure, and pressure correction; plus the linear solves.
#pragma once

#include "stagflow/fields.hpp"
#include "stagflow/fluxes.hpp"
#include "stagflow/mesh.hpp"
#include "stagflow/operators.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagflow {

enum class SchemeKind { Implicit, SemiImplicit, Explicit, Projection };
enum class ConvectionMode { Centered, Upwind };

using SourceFunction = std::function<Vec2(const Vec2&, double)>;

std::string to_string(SchemeKind kind);
std::string to_string(ConvectionMode mode);
SchemeKind parse_scheme_kind(const std::string& s);
ConvectionMode parse_convection_mode(const std::string& s);

struct SchemeParams {
  SchemeKind kind = SchemeKind::Implicit;
  double dt = 1e-2;
  double end_time = 1.0;
  double viscosity = 1.0;
  double picard_tol = 1e-10;
  int picard_max_iter = 100;
  double cfl_safety = 0.5;
  ConvectionMode convection = ConvectionMode::Centered;
  SourceFunction source;  ///< optional momentum source f(x, t)

  /// Throws SchemeError on inconsistent parameters.
  void validate() const;
};

class SchemeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time step above the explicit stability bound.
class CflError : public SchemeError {
 public:
  CflError(double dt, double bound);
  double bound() const { return bound_; }

 private:
  double bound_;
};

class SolverError : public SchemeError {
 public:
  using SchemeError::SchemeError;
};

/// Picard iteration failed to reach the tolerance.
class ConvergenceError : public SchemeError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : SchemeError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Mesh plus the assembled operators reused by every step.
class Discretization {
 public:
  explicit Discretization(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  const FaceDofMap& dofs() const { return dofs_; }
  /// Vector stiffness on internal velocity unknowns.
  const SparseMatrix& stiffness() const { return stiffness_; }
  /// (B u)_K = |K| (div u)_K.
  const SparseMatrix& divergence() const { return divergence_; }
  /// (G p)_sigma = |D_sigma| (grad p)_sigma, G = -B^T.
  const SparseMatrix& gradient() const { return gradient_; }

 private:
  const Mesh* mesh_;
  FaceDofMap dofs_;
  SparseMatrix stiffness_;
  SparseMatrix divergence_;
  SparseMatrix gradient_;
};

/// Dual-cell averages of the source at time t (zero field when f is empty).
FaceVectorField source_field(const SourceFunction& f, double t, const Mesh& mesh);

/// Implicit upwind mass balance with a frozen convecting field.
CellScalarField solve_mass_upwind(const CellScalarField& rho_old, const FaceVectorField& u_conv, double dt,
                                  const Mesh& mesh);

/// Convection matrix on internal velocity unknowns (rows scaled by |D_sigma|).
SparseMatrix convection_matrix(const FluxSet& fluxes, ConvectionMode mode, const Discretization& disc);

struct OseenSolution {
  FaceVectorField u;
  CellScalarField p;
};

/// Linearized momentum + divergence constraint, solved monolithically with a
/// bordered zero-mean pressure constraint. `fluxes` must come from
/// (rho_new, u_conv); `source` holds dual-cell averages of f at the new time.
OseenSolution solve_oseen_saddle(const FaceScalarField& rho_dual_new, const FaceScalarField& rho_dual_old,
                                 const FaceVectorField& u_old, const FluxSet& fluxes,
                                 const FaceVectorField& source, double dt, const SchemeParams& params,
                                 const Discretization& disc);

/// Convenience overload computing the fluxes from (rho_new, u_conv).
OseenSolution solve_oseen_saddle(const CellScalarField& rho_new, const FaceScalarField& rho_dual_old,
                                 const FaceVectorField& u_old, const FaceVectorField& u_conv, double dt,
                                 const SchemeParams& params, const Discretization& disc, double t_new);

/// Projects w onto discretely divergence-free fields:
/// u = w - dt/rho_D grad p with div u = 0 and zero-mean p.
OseenSolution project_divergence_free(const FaceVectorField& w, const FaceScalarField& rho_dual, double dt,
                                      const Discretization& disc);

/// Localized explicit stability bound: min over internal faces of
/// c / (|u_sigma| / h_D + mu / h_D^2), capped at c * cap.
double cfl_dt(const FaceVectorField& u, double mu, const Mesh& mesh, double c, double cap);

struct StepResult {
  State state;
  /// Fluxes of the momentum convection operator (from rho^n and u_conv).
  FluxSet fluxes;
  /// Convecting velocity used in the mass balance.
  FaceVectorField u_conv;
  /// Predicted velocity (pressure correction only).
  FaceVectorField u_predicted;
  int iterations = 1;
  std::vector<double> residual_history;
};

/// Combined relative residual of the implicit scheme at (rho, u, p).
double implicit_residual(const State& old_state, const State& candidate, const SchemeParams& params,
                         const Discretization& disc);

StepResult step_implicit(const State& state, const SchemeParams& params, const Discretization& disc);
StepResult step_semi_implicit(const State& state, const SchemeParams& params, const Discretization& disc);
StepResult step_explicit(const State& state, const SchemeParams& params, const Discretization& disc);
StepResult step_projection(const State& state, const SchemeParams& params, const Discretization& disc);

/// Dispatches on params.kind.
StepResult step(const State& state, const SchemeParams& params, const Discretization& disc);

}  // namespace stagflow
