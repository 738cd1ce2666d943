#include "stagflow/forms.hpp"

namespace stagflow {

double q_mass(const FluxSet& fluxes, const FaceVectorField& v, const FaceVectorField& w, const Mesh& mesh) {
  double s = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (mesh.face(f).is_internal()) s += v[f].dot(w[f]) * dual_flux_sum(fluxes, mesh, f);
  return s;
}

double q_mom_dual(const FluxSet& fluxes, const FaceVectorField& v, const FaceVectorField& w, const Mesh& mesh) {
  // Each dual face contributes to its two diamonds with opposite signs.
  double s = 0.0;
  for (const DualFace& e : mesh.dual_faces()) {
    const double flux = fluxes.dual[4 * e.cell + e.local_vertex];
    const Vec2 ve = 0.5 * (v[e.face_from] + v[e.face_to]);
    if (mesh.face(e.face_from).is_internal()) s += flux * w[e.face_from].dot(ve);
    if (mesh.face(e.face_to).is_internal()) s -= flux * w[e.face_to].dot(ve);
  }
  return s;
}

double q_mass(const CellScalarField& rho, const FaceVectorField& u, const FaceVectorField& v,
              const FaceVectorField& w, const Mesh& mesh) {
  return q_mass(compute_fluxes(rho, u, mesh), v, w, mesh);
}

double q_mom_dual(const CellScalarField& rho, const FaceVectorField& u, const FaceVectorField& v,
                  const FaceVectorField& w, const Mesh& mesh) {
  return q_mom_dual(compute_fluxes(rho, u, mesh), v, w, mesh);
}

double q_mom_primal(const CellScalarField& rho, const FaceVectorField& u, const FaceVectorField& v,
                    const FaceVectorField& w, const Mesh& mesh) {
  const FluxSet fluxes = primal_fluxes(rho, u, mesh);
  double s = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Vec2 wk = cell_average(w, mesh, k);
    Vec2 conv = Vec2::Zero();
    for (int i = 0; i < 4; ++i) conv += fluxes.primal_flux(k, i) * v[mesh.cell(k).faces[i]];
    s += wk.dot(conv);
  }
  return s;
}

}  // namespace stagflow
