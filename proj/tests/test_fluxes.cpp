#include "stagflow/diagnostics.hpp"
#include "stagflow/fluxes.hpp"
#include "stagflow/operators.hpp"
#include "stagflow/timestepping.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace stagflow;

namespace {

FluxSet random_primal(const Mesh& m, testing::Random& rnd) {
  FluxSet fl;
  fl.primal.assign(4 * m.num_cells(), 0.0);
  for (double& f : fl.primal) f = rnd.uniform();
  return fl;
}

}  // namespace

TEST_CASE("primal fluxes") {
  const Mesh m = build_cartesian(2, 1);
  CellScalarField rho(2);
  rho[0] = 1.0;
  rho[1] = 3.0;
  const FluxSet zero = primal_fluxes(rho, FaceVectorField(m.num_faces()), m);
  for (double f : zero.primal) CHECK(f == 0.0);

  const int f = testing::find_face(m, Vec2(0.5, 0.5));
  int i0 = -1;
  for (int i = 0; i < 4; ++i)
    if (m.cell(0).faces[i] == f) i0 = i;
  REQUIRE(i0 >= 0);
  const Vec2 n = m.outward_normal(0, i0);
  FaceVectorField u(m.num_faces());
  u.set(f, n);
  FluxSet fl = primal_fluxes(rho, u, m);
  CHECK(fl.primal_flux(0, i0) == doctest::Approx(1.0));
  CHECK(fl.face_density[f] == 1.0);
  u.set(f, -n);
  fl = primal_fluxes(rho, u, m);
  CHECK(fl.primal_flux(0, i0) == doctest::Approx(-3.0));
  CHECK(fl.face_density[f] == 3.0);

  testing::Random rnd(3);
  const Mesh p = testing::perturbed(4);
  fl = primal_fluxes(rnd.density(p), rnd.velocity(p), p);
  for (const Face& face : p.faces()) {
    if (face.is_internal())
      CHECK(fl.primal_flux(face.owner, face.owner_local) == -fl.primal_flux(face.neighbor, face.neighbor_local));
    else
      CHECK(fl.primal_flux(face.owner, face.owner_local) == 0.0);
  }
}

TEST_CASE("unit-length cells give the textbook upwind values") {
  const Mesh m = build_cartesian(2, 1, {0, 0, 2, 1});
  CellScalarField rho(2);
  rho[0] = 1.0;
  rho[1] = 3.0;
  const int f = testing::find_face(m, Vec2(1.0, 0.5));
  FaceVectorField u(m.num_faces());
  u.set(f, Vec2(1, 0));
  const double right = primal_fluxes(rho, u, m).primal_flux(0, m.face(f).owner == 0 ? m.face(f).owner_local
                                                                                     : m.face(f).neighbor_local);
  CHECK(right == doctest::Approx(1.0));
  u.set(f, Vec2(-1, 0));
  const double left = primal_fluxes(rho, u, m).primal_flux(0, m.face(f).owner == 0 ? m.face(f).owner_local
                                                                                    : m.face(f).neighbor_local);
  CHECK(left == doctest::Approx(-3.0));
}

TEST_CASE("alpha table") {
  const AlphaTable t = derive_alpha_table();
  CHECK(t.max_abs() <= 1.0);
  CHECK(t.max_abs() > 0.0);
  const AlphaTable& d = default_alpha_table();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(t.coeff[i][j] == d.coeff[i][j]);

  // Uniform rightward transport through the reference square: local faces
  // (y=0, x=1, y=1, x=0) carry outward fluxes (0, 1, 0, -1).
  const std::array<double, 4> primal{0.0, 1.0, 0.0, -1.0};
  const std::array<double, 4> expected{0.5, 0.5, -0.5, -0.5};
  for (int i = 0; i < 4; ++i) {
    double dual = 0.0;
    for (int j = 0; j < 4; ++j) dual += t.coeff[i][j] * primal[j];
    CHECK(dual == doctest::Approx(expected[i]).epsilon(1e-15));
  }
}

TEST_CASE("dual fluxes: balance, bound, linearity") {
  testing::Random rnd(19);
  for (const Mesh& m : {build_cartesian(4, 4), testing::perturbed(4, 0.25, 12)}) {
    FluxSet zero;
    zero.primal.assign(4 * m.num_cells(), 0.0);
    dual_fluxes(zero, m);
    for (double f : zero.dual) CHECK(f == 0.0);

    for (int s = 0; s < 20; ++s) {
      FluxSet fl = compute_fluxes(rnd.density(m), rnd.velocity(m), m);
      double fmax = 0.0, dmax = 0.0;
      for (double f : fl.primal) fmax = std::max(fmax, std::abs(f));
      for (double f : fl.dual) dmax = std::max(dmax, std::abs(f));
      for (double r : half_diamond_residuals(fl, m)) CHECK(std::abs(r) <= 1e-12 * fmax);
      CHECK(dmax <= 4.0 * default_alpha_table().max_abs() * fmax);

      FluxSet a = random_primal(m, rnd), b = random_primal(m, rnd), c;
      const double wa = rnd.uniform(), wb = rnd.uniform();
      c.primal.resize(a.primal.size());
      for (std::size_t i = 0; i < c.primal.size(); ++i) c.primal[i] = wa * a.primal[i] + wb * b.primal[i];
      dual_fluxes(a, m);
      dual_fluxes(b, m);
      dual_fluxes(c, m);
      for (std::size_t i = 0; i < c.dual.size(); ++i)
        CHECK(std::abs(c.dual[i] - wa * a.dual[i] - wb * b.dual[i]) < 1e-14);
      for (double r : half_diamond_residuals(c, m)) CHECK(std::abs(r) < 1e-14);
    }
  }
}

TEST_CASE("dual flux sums vanish for a divergence-free field at constant density") {
  const Mesh m = testing::perturbed(6);
  const State s = lock_exchange_state(m, 5.0);
  REQUIRE(testing::max_abs(divergence(s.u, m).values) < 1e-12);
  const FluxSet fl = compute_fluxes(CellScalarField(m.num_cells(), 2.0), s.u, m);
  double scale = 0.0;
  for (double f : fl.primal) scale = std::max(scale, std::abs(f));
  for (int f = 0; f < m.num_faces(); ++f) CHECK(std::abs(dual_flux_sum(fl, m, f)) <= 1e-12 * scale);
}

TEST_CASE("dual mass residual") {
  const Mesh m = build_cartesian(2, 2);
  const FaceScalarField rd(m.num_faces(), 1.3);
  const FluxSet rest = compute_fluxes(CellScalarField(m.num_cells(), 1.3), FaceVectorField(m.num_faces()), m);
  CHECK(testing::max_abs(dual_mass_residual(rd, rd, rest, 0.1, m)) == 0.0);

  testing::Random rnd(6);
  for (const Mesh& mm : {build_cartesian(2, 2), testing::perturbed(5)}) {
    const CellScalarField rho_old = rnd.density(mm);
    const FaceVectorField u = rnd.velocity(mm);
    const double dt = 0.05;
    const CellScalarField rho = solve_mass_upwind(rho_old, u, dt, mm);
    const FluxSet fl = compute_fluxes(rho, u, mm);
    const Eigen::VectorXd r = dual_mass_residual(dual_density(rho, mm), dual_density(rho_old, mm), fl, dt, mm);
    double scale = 0.0;
    for (double f : fl.primal) scale = std::max(scale, std::abs(f));
    CHECK(testing::max_abs(r) <= 1e-12 * scale);
  }
}
