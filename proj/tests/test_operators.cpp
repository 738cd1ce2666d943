#include "stagflow/io.hpp"
#include "stagflow/operators.hpp"
#include "stagflow/quadrature.hpp"
#include "support.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace stagflow;

TEST_CASE("divergence") {
  const Mesh m = build_cartesian(3, 3);
  int center = -1;
  for (int k = 0; k < m.num_cells(); ++k)
    if ((m.cell(k).center - Vec2(0.5, 0.5)).norm() < 1e-12) center = k;
  REQUIRE(center >= 0);

  const FaceVectorField c = interpolate_face([](const Vec2&) { return Vec2(0.3, -1.1); }, m);
  CHECK(std::abs(divergence(c, m)[center]) < 1e-14);

  const FaceVectorField lin = face_averages([](const Vec2& p) { return p; }, m);
  CHECK(divergence(lin, m)[center] == doctest::Approx(2.0).epsilon(1e-13));

  testing::Random rnd(2);
  const Mesh p = testing::perturbed(5);
  for (int s = 0; s < 10; ++s) CHECK(std::abs(weighted_sum(divergence(rnd.velocity(p), p), p)) < 1e-13);
}

TEST_CASE("gradient") {
  const Mesh m = testing::perturbed(4);
  const FaceVectorField g = gradient(CellScalarField(m.num_cells(), 4.0), m);
  CHECK(testing::max_abs(g.x) == 0.0);
  CHECK(testing::max_abs(g.y) == 0.0);

  const Mesh two = build_cartesian(2, 1, {0, 0, 2, 1});
  CellScalarField p(2);
  p[0] = 0.5;
  p[1] = 1.5;
  const FaceVectorField gp = gradient(p, two);
  const int f = testing::find_face(two, Vec2(1.0, 0.5));
  CHECK((gp[f] - Vec2(2.0, 0.0)).norm() < 1e-14);
  for (int e = 0; e < two.num_faces(); ++e)
    if (!two.face(e).is_internal()) CHECK(gp[e].norm() == 0.0);
}

TEST_CASE("grad/div duality") {
  testing::Random rnd(17);
  for (const Mesh& m : {build_cartesian(4, 4), testing::perturbed(6, 0.3, 1)}) {
    for (int s = 0; s < 20; ++s) {
      const CellScalarField p = rnd.cells(m);
      const FaceVectorField v = rnd.velocity(m);
      const CellScalarField d = divergence(v, m);
      const FaceVectorField g = gradient(p, m);
      double a = 0.0, b = 0.0, scale = 0.0;
      for (int k = 0; k < m.num_cells(); ++k) {
        a += m.cell(k).volume * p[k] * d[k];
        scale += std::abs(m.cell(k).volume * p[k] * d[k]);
      }
      for (int f = 0; f < m.num_faces(); ++f) b += m.face(f).dual_volume * g[f].dot(v[f]);
      CHECK(std::abs(a + b) <= 1e-12 * scale);
    }
    const FaceDofMap dofs(m);
    const SparseMatrix bm = weighted_divergence_matrix(m, dofs);
    const SparseMatrix gm = weighted_gradient_matrix(m, dofs);
    const SparseMatrix bt = bm.transpose();
    CHECK((Eigen::MatrixXd(gm) + Eigen::MatrixXd(bt)).norm() <= 1e-14 * Eigen::MatrixXd(gm).norm());
  }
}

TEST_CASE("dof map") {
  const Mesh m = build_cartesian(3, 2);
  const FaceDofMap dofs(m);
  CHECK(dofs.num_internal() == m.num_internal_faces());
  testing::Random rnd(1);
  const FaceVectorField u = rnd.velocity(m);
  const FaceVectorField back = dofs.scatter(dofs.gather(u), m.num_faces());
  CHECK((back.x - u.x).norm() == 0.0);
  CHECK((back.y - u.y).norm() == 0.0);
  for (int i = 0; i < dofs.num_internal(); ++i) CHECK(dofs.index(dofs.face(i)) == i);
}

TEST_CASE("shape functions") {
  for (double xi : {0.0, 0.2, 0.5, 0.93})
    for (double eta : {0.0, 0.4, 1.0}) {
      const ShapeValues s = rt_shape(xi, eta);
      CHECK(std::abs(s.value[0] + s.value[1] + s.value[2] + s.value[3] - 1.0) < 1e-14);
      CHECK((s.grad[0] + s.grad[1] + s.grad[2] + s.grad[3]).norm() < 1e-14);
    }
  const std::array<std::pair<Vec2, Vec2>, 4> faces{
      {{Vec2(0, 0), Vec2(1, 0)}, {Vec2(1, 0), Vec2(1, 1)}, {Vec2(1, 1), Vec2(0, 1)}, {Vec2(0, 1), Vec2(0, 0)}}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double mean = quad::integrate_segment(faces[i].first, faces[i].second,
                                                  [&](const Vec2& x) { return rt_shape(x.x(), x.y()).value[j]; });
      CHECK(std::abs(mean - (i == j ? 1.0 : 0.0)) < 1e-14);
    }
  // Face means of x: 1/2 (y=0), 1 (x=1), 1/2 (y=1), 0 (x=0).
  const std::array<double, 4> means{0.5, 1.0, 0.5, 0.0};
  for (double xi : {0.1, 0.6})
    for (double eta : {0.3, 0.9}) {
      const ShapeValues s = rt_shape(xi, eta);
      Vec2 g = Vec2::Zero();
      double val = 0.0;
      for (int i = 0; i < 4; ++i) {
        g += means[i] * s.grad[i];
        val += means[i] * s.value[i];
      }
      CHECK((g - Vec2(1, 0)).norm() < 1e-14);
      CHECK(val == doctest::Approx(xi).epsilon(1e-14));
    }
}

TEST_CASE("diffusion operator") {
  for (const Mesh& m : {build_cartesian(4, 4), testing::perturbed(4, 0.3, 2)}) {
    const SparseMatrix a = assemble_stiffness(m);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_faces());
    CHECK(testing::max_abs(a * ones) < 1e-13);

    const SparseOperator d = assemble_diffusion(m);
    CHECK(d.symmetric);
    const Eigen::MatrixXd dense(d.matrix);
    CHECK((dense - dense.transpose()).norm() <= 1e-13 * dense.norm());
    for (int f = 0; f < m.num_faces(); ++f)
      if (!m.face(f).is_internal()) {
        CHECK(dense(f, f) == 1.0);
        CHECK(dense.row(f).cwiseAbs().sum() == 1.0);
      }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    for (int k = 0; k < m.num_cells(); ++k) {
      const Eigen::Matrix4d ck = cell_stiffness(m, k);
      CHECK((ck - ck.transpose()).norm() < 1e-14);
      CHECK(ck.rowwise().sum().norm() < 1e-13);
    }
  }
}

TEST_CASE("discrete divergence of an interpolated solenoidal field vanishes") {
  // Curl of x^3 + x^2 y - 2 x y^2 + y^3.
  const auto v = [](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return Vec2(x * x - 4 * x * y + 3 * y * y, -(3 * x * x + 2 * x * y - 2 * y * y));
  };
  const Mesh para = Mesh::from_cells({{0, 0}, {0.5, 0}, {1, 0}, {0.2, 0.5}, {0.7, 0.5}, {1.2, 0.5}},
                                     {{0, 1, 4, 3}, {1, 2, 5, 4}});
  for (const Mesh& m : {build_cartesian(5, 5), para}) {
    const CellScalarField d = divergence(face_averages(v, m), m);
    CHECK(testing::max_abs(d.values) < 1e-14);
  }
}

TEST_CASE("jumps") {
  testing::Random rnd(5);
  for (const Mesh& m : {build_cartesian(4, 4), testing::perturbed(5)}) {
    const JumpIntegrals j = jump_integrals(rnd.velocity(m), m);
    for (int f = 0; f < m.num_faces(); ++f)
      if (m.face(f).is_internal()) CHECK(j.mean[f].norm() < 1e-12);
  }
  const Mesh para = Mesh::from_cells({{0, 0}, {1, 0}, {2, 0}, {0.3, 1}, {1.3, 1}, {2.3, 1}},
                                     {{0, 1, 4, 3}, {1, 2, 5, 4}});
  const auto affine = [](const Vec2& p) { return Vec2(1 + 2 * p.x() - p.y(), 0.5 * p.y() - 3 * p.x()); };
  for (const Mesh& m : {build_cartesian(3, 3), para}) {
    const JumpIntegrals j = jump_integrals(face_averages(affine, m), m);
    for (int f = 0; f < m.num_faces(); ++f)
      if (m.face(f).is_internal()) CHECK(j.squared[f] < 1e-26);
  }

  std::vector<double> ratios;
  Mesh m = testing::perturbed(4, 0.2, 6);
  for (int level = 0; level < 3; ++level) {
    double r = 0.0;
    for (int s = 0; s < 10; ++s) {
      const FaceVectorField u = rnd.velocity(m);
      r = std::max(r, norm(u, NormKind::JumpSeminorm, m) / norm(u, NormKind::BrokenH1, m));
    }
    ratios.push_back(r);
    m = refine(m);
  }
  MESSAGE("jump/broken ratios " << ratios[0] << ' ' << ratios[1] << ' ' << ratios[2]);
  CHECK(ratios[1] <= 2.0 * ratios[0]);
  CHECK(ratios[2] <= 2.0 * ratios[0]);
}

TEST_CASE("matrix market export") {
  const Mesh m = build_cartesian(2, 2);
  const auto path = std::filesystem::temp_directory_path() / "stagflow_stiffness.mtx";
  write_matrix_market(path.string(), assemble_diffusion(m).matrix);
  std::ifstream is(path);
  std::string banner, object, format, field;
  is >> banner >> object >> format >> field;
  CHECK(banner == "%%MatrixMarket");
  CHECK(format == "coordinate");
  CHECK(field == "real");
  std::string symmetry;
  int rows = 0, cols = 0;
  is >> symmetry >> rows >> cols;
  CHECK(rows == m.num_faces());
  CHECK(cols == m.num_faces());
  std::filesystem::remove(path);
}
