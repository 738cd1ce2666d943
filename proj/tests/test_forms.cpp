#include "stagflow/diagnostics.hpp"
#include "stagflow/fluxes.hpp"
#include "stagflow/forms.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace stagflow;

namespace {

double reordered_mass_form(const CellScalarField& rho, const FaceVectorField& u, const FaceVectorField& v,
                           const FaceVectorField& w, const Mesh& m) {
  const FluxSet fl = primal_fluxes(rho, u, m);
  std::vector<double> phi(m.num_cells(), 0.0);
  for (int k = 0; k < m.num_cells(); ++k)
    for (int i = 0; i < 4; ++i) {
      const int f = m.cell(k).faces[i];
      phi[k] += v[f].dot(w[f]);
    }
  double s = 0.0;
  for (const Face& f : m.faces())
    if (f.is_internal()) s += fl.primal_flux(f.owner, f.owner_local) * (phi[f.neighbor] - phi[f.owner]);
  return -kXi * s;
}

}  // namespace

TEST_CASE("trivial arguments") {
  const Mesh m = testing::perturbed(4);
  testing::Random rnd(1);
  const CellScalarField rho = rnd.density(m);
  const FaceVectorField u = rnd.velocity(m), v = rnd.velocity(m), w = rnd.velocity(m);
  const FaceVectorField zero(m.num_faces());
  CHECK(q_mass(rho, zero, v, w, m) == 0.0);
  CHECK(q_mass(rho, u, v, zero, m) == 0.0);
  CHECK(q_mom_dual(rho, zero, v, w, m) == 0.0);
  CHECK(q_mom_primal(rho, zero, v, w, m) == 0.0);
}

TEST_CASE("mass form reordering") {
  testing::Random rnd(2);
  for (const Mesh& m : {build_cartesian(4, 4), testing::perturbed(6, 0.3, 4)}) {
    for (int s = 0; s < 20; ++s) {
      const CellScalarField rho = rnd.density(m);
      const FaceVectorField u = rnd.velocity(m), v = rnd.velocity(m), w = rnd.velocity(m);
      const double a = q_mass(rho, u, v, w, m), b = reordered_mass_form(rho, u, v, w, m);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1e-300));
    }
  }
}

TEST_CASE("skew identity") {
  testing::Random rnd(3);
  for (const Mesh& m : {build_cartesian(5, 5), testing::perturbed(5, 0.3, 8)}) {
    for (int s = 0; s < 20; ++s) {
      const CellScalarField rho = rnd.density(m);
      const FaceVectorField u = rnd.velocity(m), v = rnd.velocity(m);
      const double qm = q_mom_dual(rho, u, v, v, m), qs = q_mass(rho, u, v, v, m);
      CHECK(std::abs(qm - 0.5 * qs) <= 1e-12 * (std::abs(qm) + std::abs(qs)));
    }
  }
}

TEST_CASE("momentum form vanishes on v.v for a solenoidal field at constant density") {
  const Mesh m = testing::perturbed(6);
  const State s = lock_exchange_state(m, 3.0);
  testing::Random rnd(4);
  const FaceVectorField v = rnd.velocity(m);
  const CellScalarField rho(m.num_cells(), 1.5);
  const double scale = std::abs(q_mom_dual(rho, s.u, v, rnd.velocity(m), m));
  CHECK(std::abs(q_mom_dual(rho, s.u, v, v, m)) <= 1e-12 * scale);
}

TEST_CASE("linearity in v and w") {
  const Mesh m = testing::perturbed(4);
  testing::Random rnd(5);
  const CellScalarField rho = rnd.density(m);
  const FaceVectorField u = rnd.velocity(m), v1 = rnd.velocity(m), v2 = rnd.velocity(m), w = rnd.velocity(m);
  const double a = 0.7, b = -1.3;
  const FaceVectorField v = a * v1 + b * v2;
  for (auto form : {&q_mass, &q_mom_dual, &q_mom_primal}) {
    const double lhs = form(rho, u, v, w, m);
    const double rhs = a * form(rho, u, v1, w, m) + b * form(rho, u, v2, w, m);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    const double lw = form(rho, u, w, v, m);
    const double rw = a * form(rho, u, w, v1, m) + b * form(rho, u, w, v2, m);
    CHECK(lw == doctest::Approx(rw).epsilon(1e-12));
  }
}

TEST_CASE("dual and primal momentum forms agree under refinement") {
  const auto bump = [](const Vec2& p) { return p.x() * (1 - p.x()) * p.y() * (1 - p.y()); };
  const auto rho_fn = [](const Vec2& p) { return 2.0 + std::sin(3 * p.x()) * std::cos(2 * p.y()); };
  Mesh m = build_cartesian(4, 4);
  std::vector<double> diff;
  for (int level = 0; level < 4; ++level) {
    const CellScalarField rho = project_cell(rho_fn, m);
    const FaceVectorField u = interpolate_face(
        [&](const Vec2& p) { return Vec2(16 * bump(p) * (1 + p.y()), -16 * bump(p) * p.x()); }, m);
    const FaceVectorField v = interpolate_face(
        [&](const Vec2& p) { return Vec2(16 * bump(p) * std::sin(3 * p.x()), 16 * bump(p) * p.y()); }, m);
    const FaceVectorField w = interpolate_face(
        [&](const Vec2& p) { return Vec2(16 * bump(p) * p.x() * p.y(), 16 * bump(p) * std::cos(p.x())); }, m);
    diff.push_back(std::abs(q_mom_dual(rho, u, v, w, m) - q_mom_primal(rho, u, v, w, m)));
    m = refine(m);
  }
  MESSAGE("|Q_dual - Q_primal|: " << diff[0] << ' ' << diff[1] << ' ' << diff[2] << ' ' << diff[3]);
  for (int i = 1; i < 4; ++i) CHECK(diff[i] < diff[i - 1]);
}
