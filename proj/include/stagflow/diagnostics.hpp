/// @file diagnostics.hpp
/// @brief Discrete budgets (rho^2 and kinetic energy), the inf-sup estimator,
/// manufactured solutions and refinement studies.
#pragma once

#include "stagflow/fields.hpp"
#include "stagflow/fluxes.hpp"
#include "stagflow/mesh.hpp"
#include "stagflow/timestepping.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagflow {

class DiagnosticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BudgetReport {
  // rho^2 balance, per cell.
  std::vector<double> rho2_residual;
  std::vector<double> rho2_remainder;
  // Kinetic energy balance, per face (zero on external faces), multiplied by |D_sigma|.
  std::vector<double> ke_residual;
  std::vector<double> ke_remainder;

  double mass = 0.0;             ///< sum |K| rho
  double mass_old = 0.0;
  double rho2 = 0.0;             ///< 1/2 sum |K| rho^2
  double rho2_old = 0.0;
  double upwind_dissipation = 0.0;  ///< dt/2 sum |sigma| (rho_L - rho_K)^2 |u.n|
  double rho_time_remainder = 0.0;  ///< 1/2 sum |K| (rho - rho_old)^2
  double kinetic_energy = 0.0;   ///< 1/2 sum |D| rho_D |u|^2
  double kinetic_energy_old = 0.0;
  double dissipation = 0.0;      ///< dt mu ||u||_b^2
  double velocity_remainder = 0.0;  ///< 1/2 sum |D| rho_D^old |u - u_old|^2
  double source_work = 0.0;      ///< dt sum |D| f . u
  double pressure_work = 0.0;    ///< dt sum |D| grad p . u
  double rho_min = 0.0;
  double rho_max = 0.0;

  /// Largest |residual| divided by the largest term magnitude of the identity.
  double rho2_max_residual = 0.0;
  double ke_max_residual = 0.0;
  double rho2_min_remainder = 0.0;
  double ke_min_remainder = 0.0;
  /// Global identities, relative to the old-level totals.
  double rho2_global_residual = 0.0;
  double ke_global_residual = 0.0;
};

/// Per-cell identity
///   |K|/(2dt)(rho^2 - rho_old^2) + 1/2 sum |sigma| rho_sigma^2 u.n + R_K = 0
/// with R_K = |K|/(2dt)(rho - rho_old)^2 - 1/2 sum |sigma|(rho_sigma - rho_K)^2 u.n,
/// and its sum over the cells. `u` is the field convecting the mass.
BudgetReport rho_square_budget(const CellScalarField& rho_old, const CellScalarField& rho_new,
                               const FaceVectorField& u, double dt, const Mesh& mesh);

/// Per-face kinetic energy identity after one implicit or semi-implicit step,
/// using the fluxes retained in `step`. In upwind mode each dual face adds
/// |F|/4 |u_a - u_b|^2 to the remainders of both sides and a conservative
/// energy flux |F|/4 (|u_a|^2 - |u_b|^2).
/// Also fills the rho^2 part from the same step.
BudgetReport energy_budget(const State& old_state, const StepResult& step, const SchemeParams& params,
                           const Discretization& disc);

/// beta_h = sqrt of the second smallest eigenvalue of B A^{-1} B^T against
/// the pressure mass matrix diag(|K|).
double inf_sup_constant(const Mesh& mesh);

/// Analytic solution with its momentum source for viscosity mu (zero pressure).
struct ExactSolution {
  std::string name;
  std::function<double(const Vec2&, double)> rho;
  std::function<Vec2(const Vec2&, double)> u;
  SourceFunction source;
};

/// Constant density, u = A e^{-t} curl(x^2(1-x)^2 y^2(1-y)^2).
ExactSolution decaying_vortex(double amplitude, double mu);
/// Same flow with rho = 1 + 2 psi / psi_max, constant along streamlines.
ExactSolution transported_vortex(double amplitude, double mu);

/// Density step (rho_left for x below the middle of the bounding box,
/// rho_right above) with a discretely divergence-free cavity vortex.
State lock_exchange_state(const Mesh& mesh, double amplitude, double rho_left = 1.0, double rho_right = 3.0);

struct MmsError {
  double rho_l2 = 0.0;
  double u_l2 = 0.0;
  double u_broken = 0.0;
};

/// ||rho - P rho_bar||_L2 (P the cell average), ||u - r_E u_bar||_L2 and the
/// broken H1 norm of the velocity error, at the state's time.
MmsError mms_error(const State& state, const ExactSolution& exact, const Mesh& mesh);

/// Discrete initial state from an exact solution at time t.
State exact_state(const ExactSolution& exact, const Mesh& mesh, double t = 0.0);

struct ConvergenceRow {
  int level = 0;
  int cells = 0;
  double h = 0.0;       ///< max diamond diameter
  double dt = 0.0;
  int steps = 0;
  double theta = 0.0;
  double alpha = 0.0;
  double rho_linf_l2 = 0.0;      ///< max over time of ||rho - rho_bar||_L2
  double u_linf_l2 = 0.0;        ///< max over time of ||u - r_E u_bar||_L2
  double u_l2_broken = 0.0;      ///< (sum dt ||u - r_E u_bar||_b^2)^{1/2}
  std::optional<double> order_rho, order_u_l2, order_u_broken;
};

struct ConvergenceTable {
  std::string case_name;
  std::vector<ConvergenceRow> rows;

  std::string to_text() const;
  std::string to_csv() const;
};

struct ConvergenceConfig {
  Mesh base;
  int levels = 3;
  SchemeParams params;  ///< dt applies to the base level, halved per refinement
  ExactSolution exact;
};

/// Runs the refine chain with dt proportional to h up to params.end_time.
ConvergenceTable convergence_study(const ConvergenceConfig& config);

/// Largest diamond diameter.
double dual_mesh_size(const Mesh& mesh);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Identity and property checks on one mesh: dual-flux balance, grad/div
/// duality, skew identity, shape-function duality, and a few steps of every
/// scheme with their invariants.
std::vector<CheckResult> verify_suite(const Mesh& mesh, std::uint64_t seed = 1);

}  // namespace stagflow
