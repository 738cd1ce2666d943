#include "stagflow/fields.hpp"
#include "stagflow/operators.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace stagflow;

TEST_CASE("project_cell") {
  const Mesh m = build_cartesian(3, 2);
  const CellScalarField c = project_cell([](const Vec2&) { return 2.5; }, m);
  for (int k = 0; k < m.num_cells(); ++k) CHECK(c[k] == doctest::Approx(2.5).epsilon(1e-15));

  const Mesh two = build_cartesian(2, 1);
  const CellScalarField x = project_cell([](const Vec2& p) { return p.x(); }, two);
  CHECK(x[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(0.75).epsilon(1e-15));

  const CellScalarField sq = project_cell([](const Vec2& p) { return p.x() * p.x(); }, build_cartesian(1, 1));
  CHECK(sq[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("interpolate_face") {
  const Mesh m = build_cartesian(2, 2);
  const FaceVectorField c = interpolate_face([](const Vec2&) { return Vec2(1.5, -2.0); }, m);
  for (int f = 0; f < m.num_faces(); ++f) {
    if (m.face(f).is_internal())
      CHECK((c[f] - Vec2(1.5, -2.0)).norm() < 1e-15);
    else
      CHECK(c[f].norm() == 0.0);
  }
  CHECK(has_zero_boundary(c, m));
  CHECK_FALSE(has_zero_boundary(face_averages([](const Vec2&) { return Vec2(1, 0); }, m), m));

  const FaceVectorField v = interpolate_face([](const Vec2& p) { return Vec2(p.y(), 0.0); }, m);
  const int f = testing::find_face(m, Vec2(0.5, 0.25));
  REQUIRE(f >= 0);
  CHECK((v[f] - Vec2(0.25, 0.0)).norm() < 1e-15);
}

TEST_CASE("dual_density") {
  const Mesh m = testing::perturbed(5);
  const FaceScalarField c = dual_density(CellScalarField(m.num_cells(), 1.7), m);
  for (int f = 0; f < m.num_faces(); ++f) CHECK(c[f] == doctest::Approx(1.7).epsilon(1e-14));

  const Mesh two = build_cartesian(2, 1);
  CellScalarField r(2);
  r[0] = 1.0;
  r[1] = 3.0;
  const FaceScalarField d = dual_density(r, two);
  CHECK(d[testing::find_face(two, Vec2(0.5, 0.5))] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d[testing::find_face(two, Vec2(0.0, 0.5))] == doctest::Approx(1.0).epsilon(1e-15));

  testing::Random rnd(4);
  for (int s = 0; s < 10; ++s) {
    const CellScalarField rho = rnd.density(m);
    const FaceScalarField rd = dual_density(rho, m);
    CHECK(rd.values.minCoeff() >= rho.values.minCoeff());
    CHECK(rd.values.maxCoeff() <= rho.values.maxCoeff());
    double dual_mass = 0.0;
    for (int f = 0; f < m.num_faces(); ++f) dual_mass += m.face(f).dual_volume * rd[f];
    CHECK(dual_mass == doctest::Approx(weighted_sum(rho, m)).epsilon(1e-13));
  }
}

TEST_CASE("make_state") {
  const Mesh m = build_cartesian(2, 2);
  const State s = make_state(m, CellScalarField(4, 2.0), FaceVectorField(m.num_faces()), 0.5);
  CHECK(s.time == 0.5);
  CHECK(s.p.size() == 4);
  CHECK(s.rho_dual.values.isApproxToConstant(2.0));
}

TEST_CASE("cell norms") {
  const Mesh m = build_cartesian(2, 1);
  CellScalarField r(2);
  r[0] = 1.0;
  r[1] = -3.0;
  CHECK(norm(r, NormKind::L2, m) == doctest::Approx(std::sqrt(0.5 * 1 + 0.5 * 9)));
  CHECK(norm(r, NormKind::Linf, m) == doctest::Approx(3.0));
  CHECK(norm(r, NormKind::Lq, m, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(norm(r, NormKind::BrokenH1, m), NormError);
  CHECK_THROWS_AS(norm(r, NormKind::Lq, m, 0.5), NormError);
}

TEST_CASE("fv_h1 of equal face values") {
  const Mesh one = build_cartesian(1, 1);
  FaceVectorField u(4);
  for (int f = 0; f < 4; ++f) u.set(f, Vec2(1, 0));
  CHECK(norm(u, NormKind::FvH1, one) == 0.0);
  u.set(0, Vec2(0, 0));
  CHECK(norm(u, NormKind::FvH1, one) > 0.0);
}

TEST_CASE("broken norm equals the stiffness form") {
  for (const Mesh& m : {build_cartesian(4, 4), testing::perturbed(5)}) {
    const FaceVectorField u = interpolate_face(
        [](const Vec2& p) { return Vec2(p.x() * (1 - p.x()) * p.y() * (1 - p.y()), 0.0); }, m);
    const SparseMatrix a = assemble_stiffness(m);
    const double form = u.x.dot(a * u.x) + u.y.dot(a * u.y);
    const double b = norm(u, NormKind::BrokenH1, m);
    CHECK(b > 0.0);
    CHECK(std::abs(b * b - form) <= 1e-12 * form);
  }
}

TEST_CASE("norm axioms") {
  const Mesh m = testing::perturbed(4);
  testing::Random rnd(21);
  for (NormKind kind : {NormKind::L2, NormKind::Linf, NormKind::BrokenH1, NormKind::FvH1, NormKind::JumpSeminorm}) {
    for (int s = 0; s < 20; ++s) {
      const FaceVectorField u = rnd.velocity(m), v = rnd.velocity(m);
      const double a = rnd.uniform(-3, 3);
      const double nu = norm(u, kind, m), nv = norm(v, kind, m);
      CHECK(nu >= 0.0);
      CHECK(norm(a * u, kind, m) == doctest::Approx(std::abs(a) * nu).epsilon(1e-12));
      CHECK(norm(u + v, kind, m) <= nu + nv + 1e-12);
    }
  }
  const FaceVectorField u = rnd.velocity(m);
  CHECK(norm(u, NormKind::Lq, m, 3.0) <= norm(u, NormKind::Linf, m) * std::cbrt(m.domain_volume()) + 1e-14);
}

TEST_CASE("observed Poincare and fv/broken ratios stay bounded") {
  testing::Random rnd(8);
  std::vector<double> poincare, fv;
  Mesh m = testing::perturbed(4, 0.2, 5);
  for (int level = 0; level < 3; ++level) {
    double p = 0.0, r = 0.0;
    for (int s = 0; s < 10; ++s) {
      const FaceVectorField u = rnd.velocity(m);
      const double b = norm(u, NormKind::BrokenH1, m);
      p = std::max(p, norm(u, NormKind::L2, m) / b);
      r = std::max(r, norm(u, NormKind::FvH1, m) / b);
    }
    poincare.push_back(p);
    fv.push_back(r);
    m = refine(m);
  }
  MESSAGE("Poincare ratios " << poincare[0] << ' ' << poincare[1] << ' ' << poincare[2]);
  MESSAGE("fv/broken ratios " << fv[0] << ' ' << fv[1] << ' ' << fv[2]);
  for (int i = 1; i < 3; ++i) {
    CHECK(poincare[i] <= 2.0 * poincare[0]);
    CHECK(fv[i] <= 2.0 * fv[0]);
  }
}

TEST_CASE("interpolation error is first order in the broken norm") {
  const auto v = [](const Vec2& p) {
    return Vec2(std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()), p.x() * p.y() * (1 - p.x()) * (1 - p.y()));
  };
  const auto grad = [](const Vec2& p) {
    Eigen::Matrix2d g;
    g << M_PI * std::cos(M_PI * p.x()) * std::sin(M_PI * p.y()), M_PI * std::sin(M_PI * p.x()) * std::cos(M_PI * p.y()),
        (1 - 2 * p.x()) * p.y() * (1 - p.y()), p.x() * (1 - p.x()) * (1 - 2 * p.y());
    return g;
  };
  Mesh m = build_cartesian(4, 4);
  std::vector<double> err, h;
  for (int level = 0; level < 3; ++level) {
    const FaceVectorField u = interpolate_face(v, m);
    double e2 = 0.0;
    for (int k = 0; k < m.num_cells(); ++k) {
      const Cell& c = m.cell(k);
      const Vec2 a = m.vertex(c.vertices[0]), b = m.vertex(c.vertices[2]);
      for (double xi : {0.1127016653792583, 0.5, 0.8872983346207417})
        for (double eta : {0.1127016653792583, 0.5, 0.8872983346207417}) {
          const double w = (xi == 0.5 ? 8.0 / 18 : 5.0 / 18) * (eta == 0.5 ? 8.0 / 18 : 5.0 / 18) * c.volume;
          const Vec2 x = a + Vec2(xi * (b - a).x(), eta * (b - a).y());
          const double dx = 1e-6;
          Eigen::Matrix2d gh;
          for (int d = 0; d < 2; ++d) {
            const double sx = d == 0 ? dx / (b - a).x() : 0.0, sy = d == 1 ? dx / (b - a).y() : 0.0;
            const Vec2 diff = (reconstruct(u, m, k, xi + sx, eta + sy) - reconstruct(u, m, k, xi - sx, eta - sy)) /
                              (2 * dx);
            gh.col(d) = diff;
          }
          e2 += w * (gh - grad(x)).squaredNorm();
        }
    }
    err.push_back(std::sqrt(e2));
    h.push_back(regularity(m).h);
    m = refine(m);
  }
  for (int i = 1; i < 3; ++i) {
    const double order = std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i]);
    MESSAGE("order " << order);
    CHECK(order > 0.85);
    CHECK(order < 1.3);
  }
}
