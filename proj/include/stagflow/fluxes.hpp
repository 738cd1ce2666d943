/// @file fluxes.hpp
/// @brief Upwind primal mass fluxes and their reconstruction on the dual mesh.
///
/// The dual fluxes inside a cell K are linear combinations of the four primal
/// fluxes of K. The coefficients come from the reference square: a momentum
/// field w = (a + b x, c + d y) with constant divergence matching the four
/// primal fluxes is integrated across the four mass-center-to-vertex segments.
/// Because every half diamond has volume |K|/4, the same table serves every
/// cell and the half-diamond mass balance
///   F_{K,s} + sum_{e in K} F_{s,e} = 1/4 sum_{s'} F_{K,s'}
/// holds identically.
#pragma once

#include "stagflow/fields.hpp"
#include "stagflow/mesh.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace stagflow {

/// coeff[i][j]: flux across the dual face at local vertex i, counted out of the
/// diamond of local face (i + 3) % 4, per unit outward primal flux through
/// local face j.
struct AlphaTable {
  std::array<std::array<double, 4>, 4> coeff{};

  double max_abs() const;
};

class FluxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Derives the table on (0,1)^2 and checks the half-diamond balance on random
/// primal fluxes; throws FluxError if the check fails.
AlphaTable derive_alpha_table();

/// The table used by the scheme (derived once).
const AlphaTable& default_alpha_table();

struct FluxSet {
  /// F_{K,sigma} at index 4 K + i (local face i), outward from K.
  std::vector<double> primal;
  /// F_{from,e} at index 4 K + i (dual face at local vertex i).
  std::vector<double> dual;
  /// Upwind face density rho_sigma.
  FaceScalarField face_density;

  double primal_flux(int k, int i) const { return primal[4 * k + i]; }
  double dual_flux(int k, int i) const { return dual[4 * k + i]; }
  bool has_dual() const { return !dual.empty(); }
};

/// F_{K,sigma} = |sigma| rho_sigma u_sigma . n_{K,sigma} with upwind rho_sigma;
/// zero on external faces.
FluxSet primal_fluxes(const CellScalarField& rho, const FaceVectorField& u, const Mesh& mesh);

/// Fills the dual part from the primal part.
void dual_fluxes(FluxSet& fluxes, const Mesh& mesh, const AlphaTable& alpha = default_alpha_table());

/// Primal and dual fluxes in one call.
FluxSet compute_fluxes(const CellScalarField& rho, const FaceVectorField& u, const Mesh& mesh,
                       const AlphaTable& alpha = default_alpha_table());

/// Sum over the faces of D_sigma of F_{sigma,e} (outward from D_sigma).
double dual_flux_sum(const FluxSet& fluxes, const Mesh& mesh, int face);

/// Residual of the half-diamond balance at index 4 K + i.
std::vector<double> half_diamond_residuals(const FluxSet& fluxes, const Mesh& mesh);

/// (|D_sigma|/dt)(rho_D^new - rho_D^old) + sum_e F_{sigma,e} for internal
/// faces; zero on external faces.
Eigen::VectorXd dual_mass_residual(const FaceScalarField& rho_dual_new, const FaceScalarField& rho_dual_old,
                                   const FluxSet& fluxes, double dt, const Mesh& mesh);

}  // namespace stagflow
