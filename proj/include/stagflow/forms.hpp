/// @file forms.hpp
/// @brief Discrete variational forms of the mass and momentum convection terms.
///
/// All forms build their fluxes from (rho, u) with the upwind density, so they
/// are linear in v and w but only piecewise linear in u.
#pragma once

#include "stagflow/fields.hpp"
#include "stagflow/fluxes.hpp"
#include "stagflow/mesh.hpp"

namespace stagflow {

/// sum_{sigma internal} (v_sigma . w_sigma) sum_e F_{sigma,e}(rho, u).
double q_mass(const CellScalarField& rho, const FaceVectorField& u, const FaceVectorField& v,
              const FaceVectorField& w, const Mesh& mesh);

/// sum_{sigma internal} w_sigma . sum_e F_{sigma,e}(rho, u) v_e, v_e centered.
double q_mom_dual(const CellScalarField& rho, const FaceVectorField& u, const FaceVectorField& v,
                  const FaceVectorField& w, const Mesh& mesh);

/// sum_K w_K . sum_{sigma in E(K)} F_{K,sigma}(rho, u) v_sigma, w_K the face average.
double q_mom_primal(const CellScalarField& rho, const FaceVectorField& u, const FaceVectorField& v,
                    const FaceVectorField& w, const Mesh& mesh);

/// Variants taking precomputed fluxes.
double q_mass(const FluxSet& fluxes, const FaceVectorField& v, const FaceVectorField& w, const Mesh& mesh);
double q_mom_dual(const FluxSet& fluxes, const FaceVectorField& v, const FaceVectorField& w, const Mesh& mesh);

}  // namespace stagflow
