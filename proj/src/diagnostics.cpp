#include "stagflow/diagnostics.hpp"

#include "stagflow/forms.hpp"
#include "stagflow/operators.hpp"
#include "stagflow/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace stagflow {

namespace {

double rel(double num, double den) {
  if (num == 0.0) return 0.0;
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

}  // namespace

BudgetReport rho_square_budget(const CellScalarField& rho_old, const CellScalarField& rho_new,
                               const FaceVectorField& u, double dt, const Mesh& mesh) {
  if (!(dt > 0.0)) throw DiagnosticsError("rho^2 budget: dt must be positive");
  BudgetReport r;
  const int nc = mesh.num_cells();
  r.rho2_residual.assign(nc, 0.0);
  r.rho2_remainder.assign(nc, 0.0);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < nc; ++k) {
    const Cell& c = mesh.cell(k);
    const double rk = rho_new[k];
    const double time = c.volume / (2 * dt) * (rk * rk - rho_old[k] * rho_old[k]);
    double conv = 0.0, conv_abs = 0.0, upw = 0.0;
    for (int i = 0; i < 4; ++i) {
      const int l = mesh.across(k, i);
      if (l < 0) continue;
      const double v = mesh.face(c.faces[i]).measure * u[c.faces[i]].dot(mesh.outward_normal(k, i));
      const double rs = v >= 0.0 ? rk : rho_new[l];
      conv += 0.5 * rs * rs * v;
      conv_abs += 0.5 * rs * rs * std::abs(v);
      upw += 0.5 * (rs - rk) * (rs - rk) * v;
    }
    const double remainder = c.volume / (2 * dt) * (rk - rho_old[k]) * (rk - rho_old[k]) - upw;
    r.rho2_residual[k] = time + conv + remainder;
    r.rho2_remainder[k] = remainder;
    num = std::max(num, std::abs(r.rho2_residual[k]));
    den = std::max(den, c.volume / (2 * dt) * (rk * rk + rho_old[k] * rho_old[k]) + conv_abs + std::abs(remainder));

    r.mass += c.volume * rk;
    r.mass_old += c.volume * rho_old[k];
    r.rho2 += 0.5 * c.volume * rk * rk;
    r.rho2_old += 0.5 * c.volume * rho_old[k] * rho_old[k];
    r.rho_time_remainder += 0.5 * c.volume * (rk - rho_old[k]) * (rk - rho_old[k]);
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.is_internal()) continue;
    const double jump = rho_new[fc.neighbor] - rho_new[fc.owner];
    r.upwind_dissipation += 0.5 * dt * fc.measure * jump * jump * std::abs(u[f].dot(fc.normal));
  }
  r.rho_min = rho_new.values.minCoeff();
  r.rho_max = rho_new.values.maxCoeff();
  r.rho2_max_residual = rel(num, den);
  r.rho2_min_remainder = min_of(r.rho2_remainder);
  r.rho2_global_residual = rel(std::abs(r.rho2 + r.upwind_dissipation + r.rho_time_remainder - r.rho2_old), r.rho2_old);
  return r;
}

BudgetReport energy_budget(const State& old_state, const StepResult& step, const SchemeParams& params,
                           const Discretization& disc) {
  const Mesh& mesh = disc.mesh();
  const FaceDofMap& dofs = disc.dofs();
  const State& s = step.state;
  if (!step.fluxes.has_dual() || step.u_conv.size() != mesh.num_faces())
    throw DiagnosticsError("energy budget needs the fluxes and convecting field of the step");
  const double dt = params.dt;
  BudgetReport r = rho_square_budget(old_state.rho, s.rho, step.u_conv, dt, mesh);

  const Eigen::VectorXd u = dofs.gather(s.u);
  const Eigen::VectorXd au = disc.stiffness() * u;
  const Eigen::VectorXd gp = disc.gradient() * s.p.values;
  const FaceVectorField f = source_field(params.source, s.time, mesh);

  // Centered convection term 1/2 sum_e F_e u_sigma . u_sigma' per face.
  std::vector<double> conv(mesh.num_faces(), 0.0);
  for (int e = 0; e < mesh.num_dual_faces(); ++e) {
    const DualFace& d = mesh.dual_faces()[e];
    const double w = 0.5 * step.fluxes.dual[e] * s.u[d.face_from].dot(s.u[d.face_to]);
    conv[d.face_from] += w;
    conv[d.face_to] -= w;
  }
  // Upwinding adds |F|/2 (u_a - u_b).u_a to each side of a dual face; split it into
  // |F|/4 |u_a - u_b|^2 (dissipation) and |F|/4 (|u_a|^2 - |u_b|^2) (energy flux).
  std::vector<double> up_diss(mesh.num_faces(), 0.0), up_flux(mesh.num_faces(), 0.0);
  if (params.convection == ConvectionMode::Upwind)
    for (int e = 0; e < mesh.num_dual_faces(); ++e) {
      const DualFace& d = mesh.dual_faces()[e];
      const double q = 0.25 * std::abs(step.fluxes.dual[e]);
      const Vec2 ua = s.u[d.face_from], ub = s.u[d.face_to];
      const double diss = q * (ua - ub).squaredNorm(), flux = q * (ua.squaredNorm() - ub.squaredNorm());
      up_diss[d.face_from] += diss;
      up_diss[d.face_to] += diss;
      up_flux[d.face_from] += flux;
      up_flux[d.face_to] -= flux;
    }

  r.ke_residual.assign(mesh.num_faces(), 0.0);
  r.ke_remainder.assign(mesh.num_faces(), 0.0);
  double num = 0.0, den = 0.0, extra_total = 0.0;
  for (int i = 0; i < dofs.num_internal(); ++i) {
    const int fi = dofs.face(i);
    const double vol = mesh.face(fi).dual_volume;
    const Vec2 un = s.u[fi], uo = old_state.u[fi];
    const double rn = s.rho_dual[fi], ro = old_state.rho_dual[fi];
    const double time_new = vol / (2 * dt) * rn * un.squaredNorm();
    const double time_old = vol / (2 * dt) * ro * uo.squaredNorm();
    const double diff = params.viscosity * (au[2 * i] * un.x() + au[2 * i + 1] * un.y());
    const double grad = gp[2 * i] * un.x() + gp[2 * i + 1] * un.y();
    const double src = vol * f[fi].dot(un);
    double remainder = vol / (2 * dt) * ro * (un - uo).squaredNorm();
    r.velocity_remainder += dt * remainder;
    remainder += up_diss[fi];
    extra_total += dt * (up_diss[fi] + up_flux[fi]);
    r.ke_residual[fi] = time_new - time_old + conv[fi] + up_flux[fi] + diff + grad + remainder - src;
    r.ke_remainder[fi] = remainder;
    num = std::max(num, std::abs(r.ke_residual[fi]));
    den = std::max(den, time_new + time_old + std::abs(conv[fi]) + std::abs(up_flux[fi]) + std::abs(diff) +
                            std::abs(grad) + std::abs(remainder) + std::abs(src));

    r.kinetic_energy += dt * time_new;
    r.kinetic_energy_old += dt * time_old;
    r.dissipation += dt * diff;
    r.pressure_work += dt * grad;
    r.source_work += dt * src;
  }
  r.ke_max_residual = rel(num, den);
  if (dofs.num_internal() > 0) {
    r.ke_min_remainder = r.ke_remainder[dofs.face(0)];
    for (int i = 1; i < dofs.num_internal(); ++i)
      r.ke_min_remainder = std::min(r.ke_min_remainder, r.ke_remainder[dofs.face(i)]);
  }
  const double lhs = r.kinetic_energy + r.dissipation + r.velocity_remainder + extra_total + r.pressure_work -
                     r.source_work;
  r.ke_global_residual = rel(std::abs(lhs - r.kinetic_energy_old), std::max(r.kinetic_energy_old, r.kinetic_energy));
  return r;
}

double inf_sup_constant(const Mesh& mesh) {
  const Discretization disc(mesh);
  const Eigen::SparseMatrix<double> a = disc.stiffness();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw DiagnosticsError("inf-sup: stiffness factorization failed");
  const Eigen::MatrixXd bt = Eigen::MatrixXd(disc.divergence().transpose());
  const Eigen::MatrixXd x = ldlt.solve(bt);
  Eigen::MatrixXd s = disc.divergence() * x;
  Eigen::VectorXd scale(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) scale[k] = 1.0 / std::sqrt(mesh.cell(k).volume);
  s = scale.asDiagonal() * s * scale.asDiagonal();
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DiagnosticsError("inf-sup: eigenvalue solver failed");
  if (es.eigenvalues().size() < 2) throw DiagnosticsError("inf-sup: mesh needs at least two cells");
  return std::sqrt(std::max(es.eigenvalues()[1], 0.0));
}

namespace {

struct Profile {
  double v, d1, d2, d3;
};

// x^2 (1 - x)^2 and its derivatives.
Profile profile(double x) {
  return {x * x * (1 - x) * (1 - x), 2 * x * (1 - x) * (1 - 2 * x), 2 * (1 - 6 * x + 6 * x * x), 12 * (2 * x - 1)};
}

constexpr double kPsiMax = 1.0 / 256.0;

ExactSolution vortex(const std::string& name, double amplitude, double mu, bool transported) {
  ExactSolution e;
  e.name = name;
  const auto rho = [transported](const Vec2& x, double) {
    if (!transported) return 1.0;
    return 1.0 + 2.0 * profile(x.x()).v * profile(x.y()).v / kPsiMax;
  };
  e.rho = rho;
  e.u = [amplitude](const Vec2& x, double t) {
    const Profile px = profile(x.x()), py = profile(x.y());
    const double a = amplitude * std::exp(-t);
    return Vec2(a * px.v * py.d1, -a * px.d1 * py.v);
  };
  e.source = [amplitude, mu, rho](const Vec2& x, double t) {
    const Profile X = profile(x.x()), Y = profile(x.y());
    const double a = amplitude * std::exp(-t);
    const Vec2 u(a * X.v * Y.d1, -a * X.d1 * Y.v);
    const Vec2 adv(a * a * X.v * X.d1 * (Y.d1 * Y.d1 - Y.v * Y.d2), a * a * Y.v * Y.d1 * (X.d1 * X.d1 - X.v * X.d2));
    const Vec2 lap(a * (X.d2 * Y.d1 + X.v * Y.d3), -a * (X.d3 * Y.v + X.d1 * Y.d2));
    return Vec2(rho(x, t) * (-u + adv) - mu * lap);
  };
  return e;
}

}  // namespace

ExactSolution decaying_vortex(double amplitude, double mu) {
  return vortex("decaying_vortex", amplitude, mu, false);
}

ExactSolution transported_vortex(double amplitude, double mu) {
  return vortex("transported_vortex", amplitude, mu, true);
}

State exact_state(const ExactSolution& exact, const Mesh& mesh, double t) {
  CellScalarField rho = project_cell([&](const Vec2& x) { return exact.rho(x, t); }, mesh);
  FaceVectorField u = interpolate_face([&](const Vec2& x) { return exact.u(x, t); }, mesh);
  return make_state(mesh, std::move(rho), std::move(u), t);
}

MmsError mms_error(const State& state, const ExactSolution& exact, const Mesh& mesh) {
  MmsError e;
  const double t = state.time;
  const CellScalarField rho_bar = project_cell([&](const Vec2& x) { return exact.rho(x, t); }, mesh);
  e.rho_l2 = norm(CellScalarField(state.rho.values - rho_bar.values), NormKind::L2, mesh);
  const FaceVectorField err = state.u - interpolate_face([&](const Vec2& x) { return exact.u(x, t); }, mesh);
  e.u_l2 = norm(err, NormKind::L2, mesh);
  e.u_broken = norm(err, NormKind::BrokenH1, mesh);
  return e;
}

double dual_mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) h = std::max(h, geometry::polygon_diameter(mesh.diamond_polygon(f)));
  return h;
}

namespace {

std::optional<double> order(double e0, double e1, double h0, double h1) {
  if (!(e0 > 0.0 && e1 > 0.0 && h0 > h1)) return std::nullopt;
  return std::log(e0 / e1) / std::log(h0 / h1);
}

std::string fmt_order(const std::optional<double>& o, int width) {
  std::ostringstream os;
  if (o)
    os << std::setw(width) << std::fixed << std::setprecision(3) << *o;
  else
    os << std::setw(width) << "-";
  return os.str();
}

}  // namespace

ConvergenceTable convergence_study(const ConvergenceConfig& config) {
  if (config.levels < 1) throw DiagnosticsError("convergence study needs at least one level");
  config.params.validate();
  ConvergenceTable table;
  table.case_name = config.exact.name;
  Mesh mesh = config.base;
  double dt = config.params.dt;
  for (int level = 0; level < config.levels; ++level) {
    if (level > 0) {
      mesh = refine(mesh);
      dt *= 0.5;
    }
    const Discretization disc(mesh);
    SchemeParams params = config.params;
    params.dt = dt;
    params.source = config.exact.source;
    const RegularityReport reg = regularity(mesh);
    ConvergenceRow row;
    row.level = level;
    row.cells = mesh.num_cells();
    row.h = dual_mesh_size(mesh);
    row.dt = dt;
    row.steps = std::max(1, static_cast<int>(std::lround(params.end_time / dt)));
    row.theta = reg.theta;
    row.alpha = reg.alpha;
    State s = exact_state(config.exact, mesh, 0.0);
    double broken2 = 0.0;
    for (int n = 0; n < row.steps; ++n) {
      try {
        s = step(s, params, disc).state;
      } catch (const SchemeError& ex) {
        throw DiagnosticsError("level " + std::to_string(level) + ", step " + std::to_string(n + 1) + ": " +
                               ex.what());
      }
      const MmsError e = mms_error(s, config.exact, mesh);
      row.rho_linf_l2 = std::max(row.rho_linf_l2, e.rho_l2);
      row.u_linf_l2 = std::max(row.u_linf_l2, e.u_l2);
      broken2 += dt * e.u_broken * e.u_broken;
    }
    row.u_l2_broken = std::sqrt(broken2);
    if (!table.rows.empty()) {
      const ConvergenceRow& prev = table.rows.back();
      row.order_rho = order(prev.rho_linf_l2, row.rho_linf_l2, prev.h, row.h);
      row.order_u_l2 = order(prev.u_linf_l2, row.u_linf_l2, prev.h, row.h);
      row.order_u_broken = order(prev.u_l2_broken, row.u_l2_broken, prev.h, row.h);
    }
    table.rows.push_back(row);
  }
  return table;
}

std::string ConvergenceTable::to_text() const {
  std::ostringstream os;
  os << case_name << "\n";
  os << std::setw(5) << "level" << std::setw(8) << "cells" << std::setw(12) << "h" << std::setw(12) << "dt"
     << std::setw(14) << "rho Linf(L2)" << std::setw(8) << "order" << std::setw(14) << "u Linf(L2)"
     << std::setw(8) << "order" << std::setw(14) << "u L2(H1b)" << std::setw(8) << "order" << "\n";
  for (const ConvergenceRow& r : rows) {
    os << std::setw(5) << r.level << std::setw(8) << r.cells << std::scientific << std::setprecision(4)
       << std::setw(12) << r.h << std::setw(12) << r.dt << std::setw(14) << r.rho_linf_l2
       << fmt_order(r.order_rho, 8) << std::scientific << std::setprecision(4) << std::setw(14) << r.u_linf_l2
       << fmt_order(r.order_u_l2, 8) << std::scientific << std::setprecision(4) << std::setw(14)
       << r.u_l2_broken << fmt_order(r.order_u_broken, 8) << "\n";
  }
  return os.str();
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream os;
  os << "level,cells,h,dt,steps,theta,alpha,rho_linf_l2,u_linf_l2,u_l2_broken,order_rho,order_u_l2,order_u_broken\n";
  os << std::setprecision(17);
  const auto opt = [](const std::optional<double>& o) {
    std::ostringstream s;
    s << std::setprecision(17);
    if (o) s << *o;
    return s.str();
  };
  for (const ConvergenceRow& r : rows)
    os << r.level << ',' << r.cells << ',' << r.h << ',' << r.dt << ',' << r.steps << ',' << r.theta << ','
       << r.alpha << ',' << r.rho_linf_l2 << ',' << r.u_linf_l2 << ',' << r.u_l2_broken << ','
       << opt(r.order_rho) << ',' << opt(r.order_u_l2) << ',' << opt(r.order_u_broken) << '\n';
  return os.str();
}

}  // namespace stagflow
