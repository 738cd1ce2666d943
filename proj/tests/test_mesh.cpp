#include "stagflow/mesh.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace stagflow;

TEST_CASE("cartesian counts") {
  const Mesh m = build_cartesian(2, 2);
  CHECK(m.num_cells() == 4);
  CHECK(m.num_faces() == 12);
  CHECK(m.num_internal_faces() == 4);
  CHECK(m.num_dual_faces() == 16);
  for (int k = 0; k < 4; ++k) CHECK(m.half_diamond_volume(k) == doctest::Approx(1.0 / 16).epsilon(1e-15));

  const Mesh one = build_cartesian(1, 1);
  CHECK(one.num_cells() == 1);
  CHECK(one.num_faces() == 4);
  CHECK(one.num_internal_faces() == 0);
  CHECK(one.num_dual_faces() == 4);
}

TEST_CASE("bad input") {
  CHECK_THROWS_AS(build_cartesian(0, 2), MeshError);
  CHECK_THROWS_AS(build_cartesian(2, 2, {0, 0, 0, 1}), MeshError);
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0.2, 0.2}, {0, 1}};
  CHECK_THROWS_AS(Mesh::from_cells(v, {{0, 1, 2, 3}}), NonConvexCellError);
  CHECK_THROWS_AS(Mesh::from_cells({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 7}}), MeshError);
  CHECK_THROWS_AS(perturb(build_cartesian(2, 2), -0.1, 1), MeshError);
}

TEST_CASE("geometric invariants") {
  for (const Mesh& m : {build_cartesian(3, 2, {0, 0, 2, 1}), testing::perturbed(6)}) {
    double dual = 0.0;
    for (const Face& f : m.faces()) dual += f.dual_volume;
    CHECK(dual == doctest::Approx(m.domain_volume()).epsilon(1e-13));
    for (int k = 0; k < m.num_cells(); ++k) {
      Vec2 s = Vec2::Zero();
      for (int i = 0; i < 4; ++i) s += m.face(m.cell(k).faces[i]).measure * m.outward_normal(k, i);
      CHECK(s.norm() < 1e-14);
      for (int i = 0; i < 4; ++i) {
        const DualFace& d = m.dual_face(k, i);
        CHECK(d.face_from == m.cell(k).faces[(i + 3) % 4]);
        CHECK(d.face_to == m.cell(k).faces[i]);
      }
    }
    for (const Face& f : m.faces()) {
      if (f.is_internal()) {
        CHECK(f.dual_volume ==
              doctest::Approx(0.25 * (m.cell(f.owner).volume + m.cell(f.neighbor).volume)).epsilon(1e-14));
        CHECK(m.across(f.owner, f.owner_local) == f.neighbor);
      } else {
        CHECK(f.dual_volume == doctest::Approx(0.25 * m.cell(f.owner).volume).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("diamond polygons of parallelogram cells") {
  const Mesh m = build_cartesian(3, 2, {0, 0, 2, 1});
  for (int f = 0; f < m.num_faces(); ++f)
    CHECK(geometry::polygon_area(m.diamond_polygon(f)) == doctest::Approx(m.face(f).dual_volume).epsilon(1e-13));
}

TEST_CASE("refine") {
  const Mesh one = build_cartesian(1, 1);
  const Mesh r = refine(one);
  CHECK(r.num_cells() == 4);
  for (const Cell& c : r.cells()) CHECK(c.volume == doctest::Approx(0.25));

  const Mesh m = build_cartesian(3, 3);
  const RegularityReport a = regularity(m), b = regularity(refine(m));
  CHECK(b.h == doctest::Approx(a.h / 2).epsilon(1e-14));
  CHECK(b.theta_m == doctest::Approx(a.theta_m).epsilon(1e-12));
  CHECK(b.theta_e1 == doctest::Approx(a.theta_e1).epsilon(1e-12));
  CHECK(b.theta_e2 == doctest::Approx(a.theta_e2).epsilon(1e-12));
  CHECK(b.theta_e3 == doctest::Approx(a.theta_e3).epsilon(1e-12));

  Mesh p = testing::perturbed(4, 0.25, 11);
  double alpha = regularity(p).alpha;
  CHECK(alpha > 0.0);
  for (int level = 0; level < 3; ++level) {
    p = refine(p);
    const double next = regularity(p).alpha;
    CHECK(next <= alpha + 1e-14);
    alpha = next;
  }
  CHECK(alpha < 0.25 * regularity(testing::perturbed(4, 0.25, 11)).alpha);
}

TEST_CASE("perturb") {
  const Mesh m = build_cartesian(4, 4);
  CHECK(perturb(m, 0.0, 5) == m);
  const Mesh a = perturb(m, 0.1, 7), b = perturb(m, 0.1, 7);
  CHECK(a == b);
  CHECK(regularity(a).alpha > 0.0);
  CHECK_FALSE(perturb(m, 0.1, 8) == a);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Vec2 x = m.vertex(v);
    const bool boundary = x.x() == 0.0 || x.x() == 1.0 || x.y() == 0.0 || x.y() == 1.0;
    if (boundary) CHECK(a.vertex(v) == x);
  }
  CHECK(a.domain_volume() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("regularity") {
  const RegularityReport one = regularity(build_cartesian(1, 1));
  CHECK(one.theta_m == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(one.h == doctest::Approx(std::sqrt(2.0)));
  CHECK(one.alpha == 0.0);
  CHECK(regularity(build_cartesian(5, 3, {0, 0, 2, 1})).alpha == doctest::Approx(0.0));

  const RegularityReport p = regularity(testing::perturbed(6));
  CHECK(p.theta == std::max({p.theta_m, p.theta_e1, p.theta_e2, p.theta_e3}));
  for (double v : {p.h, p.alpha, p.theta_m, p.theta_e1, p.theta_e2, p.theta_e3}) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }

  // Parallelogram: alpha vanishes.
  const Mesh para = Mesh::from_cells({{0, 0}, {1, 0}, {1.5, 1}, {0.5, 1}}, {{0, 1, 2, 3}});
  CHECK(cell_alpha(para, 0) == doctest::Approx(0.0));
  const Mesh trap = Mesh::from_cells({{0, 0}, {2, 0}, {1.5, 1}, {0.5, 1}}, {{0, 1, 2, 3}});
  CHECK(cell_alpha(trap, 0) > 0.1);
}

TEST_CASE("polygon helpers") {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(geometry::polygon_area(sq) == doctest::Approx(1.0));
  CHECK(geometry::polygon_perimeter(sq) == doctest::Approx(4.0));
  CHECK(geometry::polygon_diameter(sq) == doctest::Approx(std::sqrt(2.0)));
  CHECK(geometry::inscribed_diameter(sq) == doctest::Approx(1.0));
  CHECK((geometry::polygon_centroid(sq) - Vec2(0.5, 0.5)).norm() < 1e-15);
  CHECK(geometry::is_strictly_convex(sq));
  CHECK_FALSE(geometry::is_strictly_convex({{0, 0}, {1, 0}, {0.2, 0.2}, {0, 1}}));
  const std::vector<Vec2> tri{{0, 0}, {3, 0}, {0, 4}};
  CHECK(geometry::inscribed_diameter(tri) == doctest::Approx(2.0));
}
