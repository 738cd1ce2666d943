#include "stagflow/fluxes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stagflow {

double AlphaTable::max_abs() const {
  double m = 0.0;
  for (const auto& row : coeff)
    for (double a : row) m = std::max(m, std::abs(a));
  return m;
}

namespace {

const std::array<Vec2, 4> kCorners{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};

// Flux across the segment from the reference center to corner i, out of the
// diamond of local face (i+3)%4, for outward primal fluxes f (local order
// y=0, x=1, y=1, x=0).
double reference_dual_flux(const std::array<double, 4>& f, int i) {
  const double a = -f[3];
  const double b = f[1] + f[3];
  const double c = -f[0];
  const double d = f[2] + f[0];
  const Vec2 center(0.5, 0.5);
  const Vec2 seg = kCorners[i] - center;
  const Vec2 normal = Vec2(-seg.y(), seg.x()) / seg.norm();
  // w is affine, so the midpoint rule is exact.
  const Vec2 mid = center + 0.5 * seg;
  const Vec2 w(a + b * mid.x(), c + d * mid.y());
  return seg.norm() * w.dot(normal);
}

double half_diamond_residual(const std::array<double, 4>& f, const std::array<double, 4>& dual, int i) {
  const double total = f[0] + f[1] + f[2] + f[3];
  // Face i is the "from" side of the dual face at vertex i+1 and the "to"
  // side of the one at vertex i.
  return f[i] + dual[(i + 1) % 4] - dual[i] - kXi * total;
}

}  // namespace

AlphaTable derive_alpha_table() {
  AlphaTable t;
  for (int j = 0; j < 4; ++j) {
    std::array<double, 4> unit{};
    unit[j] = 1.0;
    for (int i = 0; i < 4; ++i) t.coeff[i][j] = reference_dual_flux(unit, i);
  }
  std::mt19937_64 rng(20130517);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 64; ++trial) {
    std::array<double, 4> f{};
    for (double& v : f) v = dist(rng);
    std::array<double, 4> dual{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) dual[i] += t.coeff[i][j] * f[j];
    for (int i = 0; i < 4; ++i)
      if (std::abs(half_diamond_residual(f, dual, i)) > 1e-12)
        throw FluxError("dual flux table violates the half-diamond mass balance");
  }
  return t;
}

const AlphaTable& default_alpha_table() {
  static const AlphaTable table = derive_alpha_table();
  return table;
}

FluxSet primal_fluxes(const CellScalarField& rho, const FaceVectorField& u, const Mesh& mesh) {
  FluxSet out;
  out.primal.assign(4 * mesh.num_cells(), 0.0);
  out.face_density = FaceScalarField(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.is_internal()) {
      out.face_density[f] = rho[fc.owner];
      continue;
    }
    const double un = u[f].dot(fc.normal);
    const double rf = un >= 0.0 ? rho[fc.owner] : rho[fc.neighbor];
    out.face_density[f] = rf;
    const double flux = fc.measure * rf * un;
    out.primal[4 * fc.owner + fc.owner_local] = flux;
    out.primal[4 * fc.neighbor + fc.neighbor_local] = -flux;
  }
  return out;
}

void dual_fluxes(FluxSet& fluxes, const Mesh& mesh, const AlphaTable& alpha) {
  fluxes.dual.assign(4 * mesh.num_cells(), 0.0);
  for (int k = 0; k < mesh.num_cells(); ++k)
    for (int i = 0; i < 4; ++i) {
      double s = 0.0;
      for (int j = 0; j < 4; ++j) s += alpha.coeff[i][j] * fluxes.primal[4 * k + j];
      fluxes.dual[4 * k + i] = s;
    }
}

FluxSet compute_fluxes(const CellScalarField& rho, const FaceVectorField& u, const Mesh& mesh,
                       const AlphaTable& alpha) {
  FluxSet f = primal_fluxes(rho, u, mesh);
  dual_fluxes(f, mesh, alpha);
  return f;
}

double dual_flux_sum(const FluxSet& fluxes, const Mesh& mesh, int face) {
  const Face& fc = mesh.face(face);
  const auto side = [&](int k, int i) {
    return fluxes.dual[4 * k + (i + 1) % 4] - fluxes.dual[4 * k + i];
  };
  double s = side(fc.owner, fc.owner_local);
  if (fc.is_internal()) s += side(fc.neighbor, fc.neighbor_local);
  return s;
}

std::vector<double> half_diamond_residuals(const FluxSet& fluxes, const Mesh& mesh) {
  std::vector<double> r(4 * mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    std::array<double, 4> f{}, d{};
    for (int i = 0; i < 4; ++i) {
      f[i] = fluxes.primal[4 * k + i];
      d[i] = fluxes.dual[4 * k + i];
    }
    for (int i = 0; i < 4; ++i) r[4 * k + i] = half_diamond_residual(f, d, i);
  }
  return r;
}

Eigen::VectorXd dual_mass_residual(const FaceScalarField& rho_dual_new, const FaceScalarField& rho_dual_old,
                                   const FluxSet& fluxes, double dt, const Mesh& mesh) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.is_internal()) continue;
    r[f] = fc.dual_volume / dt * (rho_dual_new[f] - rho_dual_old[f]) + dual_flux_sum(fluxes, mesh, f);
  }
  return r;
}

}  // namespace stagflow
