#include "stagflow/diagnostics.hpp"
#include "stagflow/forms.hpp"
#include "stagflow/operators.hpp"
#include "stagflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stagflow {

State lock_exchange_state(const Mesh& mesh, double amplitude, double rho_left, double rho_right) {
  Vec2 lo = mesh.vertex(0), hi = mesh.vertex(0);
  for (const Vec2& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec2 len = hi - lo;
  const auto g = [](double s) { return s * s * (1 - s) * (1 - s); };
  const auto dg = [](double s) { return 2 * s * (1 - s) * (1 - 2 * s); };
  const FaceVectorField u0 = interpolate_face(
      [&](const Vec2& x) {
        const double a = (x.x() - lo.x()) / len.x(), b = (x.y() - lo.y()) / len.y();
        return Vec2(amplitude * g(a) * dg(b) / len.y(), -amplitude * dg(a) * g(b) / len.x());
      },
      mesh);
  CellScalarField rho(mesh.num_cells());
  const double mid = 0.5 * (lo.x() + hi.x());
  for (int k = 0; k < mesh.num_cells(); ++k) rho[k] = mesh.cell(k).center.x() < mid ? rho_left : rho_right;
  State s = make_state(mesh, std::move(rho), u0);
  const Discretization disc(mesh);
  s.u = project_divergence_free(u0, FaceScalarField(mesh.num_faces(), 1.0), 1.0, disc).u;
  return s;
}

namespace {

CheckResult check(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> unit{-1.0, 1.0};

  CellScalarField density(const Mesh& mesh) {
    CellScalarField r(mesh.num_cells());
    for (int k = 0; k < mesh.num_cells(); ++k) r[k] = 2.0 + unit(rng);
    return r;
  }
  CellScalarField scalar(const Mesh& mesh) {
    CellScalarField r(mesh.num_cells());
    for (int k = 0; k < mesh.num_cells(); ++k) r[k] = unit(rng);
    return r;
  }
  FaceVectorField velocity(const Mesh& mesh) {
    FaceVectorField u(mesh.num_faces());
    for (int f = 0; f < mesh.num_faces(); ++f)
      if (mesh.face(f).is_internal()) u.set(f, Vec2(unit(rng), unit(rng)));
    return u;
  }
};

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

std::vector<CheckResult> verify_suite(const Mesh& mesh, std::uint64_t seed) {
  std::vector<CheckResult> out;
  Sampler s{std::mt19937_64(seed)};
  constexpr int kSamples = 20;

  double h1 = 0.0, duality = 0.0, skew = 0.0;
  for (int n = 0; n < kSamples; ++n) {
    const CellScalarField rho = s.density(mesh);
    const FaceVectorField u = s.velocity(mesh);
    const FluxSet fl = compute_fluxes(rho, u, mesh);
    double fmax = 0.0;
    for (double f : fl.primal) fmax = std::max(fmax, std::abs(f));
    for (double r : half_diamond_residuals(fl, mesh)) h1 = std::max(h1, std::abs(r) / std::max(fmax, 1e-300));

    const CellScalarField p = s.scalar(mesh);
    const FaceVectorField v = s.velocity(mesh);
    const CellScalarField div = divergence(v, mesh);
    const FaceVectorField grad = gradient(p, mesh);
    double a = 0.0, b = 0.0, scale = 0.0;
    for (int k = 0; k < mesh.num_cells(); ++k) {
      a += mesh.cell(k).volume * p[k] * div[k];
      scale += std::abs(mesh.cell(k).volume * p[k] * div[k]);
    }
    for (int f = 0; f < mesh.num_faces(); ++f) b += mesh.face(f).dual_volume * grad[f].dot(v[f]);
    duality = std::max(duality, std::abs(a + b) / std::max(scale, 1e-300));

    const double qm = q_mom_dual(fl, v, v, mesh);
    const double qs = q_mass(fl, v, v, mesh);
    skew = std::max(skew, std::abs(qm - 0.5 * qs) / std::max(std::abs(qm) + std::abs(qs), 1e-300));
  }
  out.push_back(check("dual flux half-diamond balance", h1, 1e-12));
  out.push_back(check("dual flux coefficient bound |alpha| - 1", default_alpha_table().max_abs() - 1.0, 0.0));
  out.push_back(check("grad/div duality", duality, 1e-12));
  out.push_back(check("convection skew identity", skew, 1e-12));

  double pou = 0.0, face_mean = 0.0;
  for (double xi : {0.1, 0.37, 0.5, 0.81})
    for (double eta : {0.05, 0.5, 0.66}) {
      const ShapeValues sv = rt_shape(xi, eta);
      pou = std::max(pou, std::abs(sv.value[0] + sv.value[1] + sv.value[2] + sv.value[3] - 1.0));
    }
  const std::array<std::pair<Vec2, Vec2>, 4> faces{{{Vec2(0, 0), Vec2(1, 0)},
                                                    {Vec2(1, 0), Vec2(1, 1)},
                                                    {Vec2(1, 1), Vec2(0, 1)},
                                                    {Vec2(0, 1), Vec2(0, 0)}}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double m = quad::integrate_segment(faces[i].first, faces[i].second,
                                               [&](const Vec2& x) { return rt_shape(x.x(), x.y()).value[j]; });
      face_mean = std::max(face_mean, std::abs(m - (i == j ? 1.0 : 0.0)));
    }
  out.push_back(check("shape function partition of unity", pou, 1e-13));
  out.push_back(check("shape function face-mean duality", face_mean, 1e-13));

  const Discretization disc(mesh);
  const State initial = lock_exchange_state(mesh, 20.0);
  const double m0 = weighted_sum(initial.rho, mesh);
  for (SchemeKind kind : {SchemeKind::Implicit, SchemeKind::SemiImplicit, SchemeKind::Explicit,
                          SchemeKind::Projection}) {
    SchemeParams params;
    params.kind = kind;
    params.viscosity = 0.1;
    params.end_time = 1.0;
    params.dt = 0.01;
    if (kind == SchemeKind::Explicit) {
      params.convection = ConvectionMode::Upwind;
      params.dt = 0.5 * cfl_dt(initial.u, params.viscosity / initial.rho_dual.values.minCoeff(), mesh,
                               params.cfl_safety, params.end_time);
    }
    State st = initial;
    double div = 0.0, drift = 0.0, below = 0.0, above = 0.0, pmean = 0.0, ke = 0.0, rho2 = 0.0, remainder = 0.0;
    for (int n = 0; n < 5; ++n) {
      const StepResult r = step(st, params, disc);
      div = std::max(div, max_abs(divergence(r.state.u, mesh).values));
      drift = std::max(drift, std::abs(weighted_sum(r.state.rho, mesh) - m0) / m0);
      below = std::max(below, 1.0 - r.state.rho.values.minCoeff());
      above = std::max(above, r.state.rho.values.maxCoeff() - 3.0);
      pmean = std::max(pmean, std::abs(weighted_sum(r.state.p, mesh)));
      const BudgetReport rb = rho_square_budget(st.rho, r.state.rho, r.u_conv, params.dt, mesh);
      rho2 = std::max(rho2, rb.rho2_max_residual);
      remainder = std::min(remainder, rb.rho2_min_remainder);
      if (kind == SchemeKind::Implicit || kind == SchemeKind::SemiImplicit) {
        const BudgetReport eb = energy_budget(st, r, params, disc);
        ke = std::max(ke, eb.ke_max_residual);
        remainder = std::min(remainder, eb.ke_min_remainder);
      }
      st = r.state;
    }
    const std::string tag = to_string(kind) + ": ";
    out.push_back(check(tag + "max |div u|", div, 1e-11));
    out.push_back(check(tag + "mass drift", drift, 1e-12));
    out.push_back(check(tag + "density below minimum", below, 1e-12));
    out.push_back(check(tag + "density above maximum", above, 1e-12));
    out.push_back(check(tag + "pressure mean", pmean, 1e-12));
    out.push_back(check(tag + "rho^2 identity", rho2, 1e-10));
    out.push_back(check(tag + "negative remainder", -remainder, 1e-12));
    if (kind == SchemeKind::Implicit || kind == SchemeKind::SemiImplicit)
      out.push_back(check(tag + "kinetic energy identity", ke, 10 * params.picard_tol));
  }
  return out;
}

}  // namespace stagflow
