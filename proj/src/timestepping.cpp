#include "stagflow/timestepping.hpp"

#include "stagflow/quadrature.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stagflow {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

std::string describe(const Mesh& mesh, double dt) {
  std::ostringstream os;
  os << "(" << mesh.num_cells() << " cells, " << mesh.num_internal_faces() << " internal faces, dt = " << dt
     << ")";
  return os.str();
}

Eigen::VectorXd solve_sparse(const ColMatrix& m, const Eigen::VectorXd& rhs, const std::string& what) {
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) throw SolverError(what + ": factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SolverError(what + ": solve failed");
  return x;
}

// |D_sigma| per velocity unknown.
Eigen::VectorXd dual_volumes(const Discretization& disc) {
  const FaceDofMap& dofs = disc.dofs();
  Eigen::VectorXd v(dofs.num_velocity_dofs());
  for (int i = 0; i < dofs.num_internal(); ++i) v[2 * i] = v[2 * i + 1] = disc.mesh().face(dofs.face(i)).dual_volume;
  return v;
}

Eigen::VectorXd per_dof(const FaceScalarField& s, const FaceDofMap& dofs) {
  Eigen::VectorXd v(dofs.num_velocity_dofs());
  for (int i = 0; i < dofs.num_internal(); ++i) v[2 * i] = v[2 * i + 1] = s[dofs.face(i)];
  return v;
}

SparseMatrix diagonal(const Eigen::VectorXd& d) {
  SparseMatrix m(d.size(), d.size());
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix abs_matrix(const SparseMatrix& m) { return m.cwiseAbs(); }

void require_zero_boundary(const FaceVectorField& u, const Mesh& mesh, const char* name) {
  if (!has_zero_boundary(u, mesh)) throw SchemeError(std::string(name) + " has nonzero boundary values");
}

double ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

void check_state(const State& s, const Mesh& mesh) {
  if (s.rho.size() != mesh.num_cells() || s.p.size() != mesh.num_cells() || s.u.size() != mesh.num_faces() ||
      s.rho_dual.size() != mesh.num_faces())
    throw SchemeError("state does not match the mesh");
  require_zero_boundary(s.u, mesh, "velocity");
}

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Implicit: return "implicit";
    case SchemeKind::SemiImplicit: return "semi_implicit";
    case SchemeKind::Explicit: return "explicit";
    case SchemeKind::Projection: return "projection";
  }
  return "?";
}

std::string to_string(ConvectionMode mode) { return mode == ConvectionMode::Centered ? "centered" : "upwind"; }

SchemeKind parse_scheme_kind(const std::string& s) {
  if (s == "implicit") return SchemeKind::Implicit;
  if (s == "semi_implicit") return SchemeKind::SemiImplicit;
  if (s == "explicit") return SchemeKind::Explicit;
  if (s == "projection") return SchemeKind::Projection;
  throw SchemeError("unknown scheme kind '" + s + "'");
}

ConvectionMode parse_convection_mode(const std::string& s) {
  if (s == "centered") return ConvectionMode::Centered;
  if (s == "upwind") return ConvectionMode::Upwind;
  throw SchemeError("unknown convection mode '" + s + "'");
}

void SchemeParams::validate() const {
  if (!(dt > 0.0)) throw SchemeError("dt must be positive");
  if (!(end_time >= 0.0)) throw SchemeError("end time must be nonnegative");
  if (!(viscosity >= 0.0)) throw SchemeError("viscosity must be nonnegative");
  if (!(picard_tol > 0.0)) throw SchemeError("Picard tolerance must be positive");
  if (picard_max_iter < 1) throw SchemeError("Picard iteration limit must be at least 1");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw SchemeError("CFL safety factor must lie in (0, 1]");
  if (kind == SchemeKind::Explicit && convection != ConvectionMode::Upwind)
    throw SchemeError("the explicit scheme requires upwind momentum convection");
}

CflError::CflError(double dt, double bound)
    : SchemeError([&] {
        std::ostringstream os;
        os.precision(17);
        os << "time step " << dt << " exceeds the explicit stability bound " << bound;
        return os.str();
      }()),
      bound_(bound) {}

Discretization::Discretization(const Mesh& mesh)
    : mesh_(&mesh),
      dofs_(mesh),
      divergence_(weighted_divergence_matrix(mesh, dofs_)),
      gradient_(weighted_gradient_matrix(mesh, dofs_)) {
  const SparseMatrix scalar = assemble_stiffness(mesh);
  std::vector<Triplet> t;
  t.reserve(2 * scalar.nonZeros());
  for (int r = 0; r < scalar.outerSize(); ++r) {
    const int ir = dofs_.index(r);
    if (ir < 0) continue;
    for (SparseMatrix::InnerIterator it(scalar, r); it; ++it) {
      const int ic = dofs_.index(static_cast<int>(it.col()));
      if (ic < 0) continue;
      for (int c = 0; c < 2; ++c) t.emplace_back(2 * ir + c, 2 * ic + c, it.value());
    }
  }
  stiffness_.resize(dofs_.num_velocity_dofs(), dofs_.num_velocity_dofs());
  stiffness_.setFromTriplets(t.begin(), t.end());
}

FaceVectorField source_field(const SourceFunction& f, double t, const Mesh& mesh) {
  FaceVectorField out(mesh.num_faces());
  if (!f) return out;
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    const Face& fc = mesh.face(fi);
    if (!fc.is_internal()) continue;
    Vec2 total = Vec2::Zero();
    for (int k : {fc.owner, fc.neighbor}) {
      const int i = k == fc.owner ? fc.owner_local : fc.neighbor_local;
      const auto tri = mesh.half_diamond_triangle(k, i);
      const double area = geometry::polygon_area({tri[0], tri[1], tri[2]});
      const Vec2 integral = quad::integrate_triangle(tri[0], tri[1], tri[2], [&](const Vec2& x) { return f(x, t); });
      total += mesh.half_diamond_volume(k) / area * integral;
    }
    out.set(fi, total / fc.dual_volume);
  }
  return out;
}

CellScalarField solve_mass_upwind(const CellScalarField& rho_old, const FaceVectorField& u_conv, double dt,
                                  const Mesh& mesh) {
  if (!(dt > 0.0)) throw SchemeError("mass balance: dt must be positive");
  const int n = mesh.num_cells();
  std::vector<Triplet> t;
  t.reserve(5 * n);
  Eigen::VectorXd rhs(n);
  for (int k = 0; k < n; ++k) {
    t.emplace_back(k, k, mesh.cell(k).volume / dt);
    rhs[k] = mesh.cell(k).volume / dt * rho_old[k];
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.is_internal()) continue;
    const double v = fc.measure * u_conv[f].dot(fc.normal);
    // Outflow from the upstream cell, inflow into the downstream one.
    const int up = v >= 0.0 ? fc.owner : fc.neighbor;
    const int down = v >= 0.0 ? fc.neighbor : fc.owner;
    const double a = std::abs(v);
    t.emplace_back(up, up, a);
    t.emplace_back(down, up, -a);
  }
  ColMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return CellScalarField(solve_sparse(m, rhs, "mass balance " + describe(mesh, dt)));
}

SparseMatrix convection_matrix(const FluxSet& fluxes, ConvectionMode mode, const Discretization& disc) {
  const Mesh& mesh = disc.mesh();
  const FaceDofMap& dofs = disc.dofs();
  std::vector<Triplet> t;
  t.reserve(8 * mesh.num_dual_faces());
  const auto add = [&](int row, int col, double v) {
    if (row < 0 || col < 0) return;
    for (int c = 0; c < 2; ++c) t.emplace_back(2 * row + c, 2 * col + c, v);
  };
  for (int e = 0; e < mesh.num_dual_faces(); ++e) {
    const DualFace& d = mesh.dual_faces()[e];
    const double flux = fluxes.dual[e];
    if (flux == 0.0) continue;
    const int a = dofs.index(d.face_from);
    const int b = dofs.index(d.face_to);
    if (mode == ConvectionMode::Centered) {
      add(a, a, 0.5 * flux);
      add(a, b, 0.5 * flux);
      add(b, a, -0.5 * flux);
      add(b, b, -0.5 * flux);
    } else {
      const int up = flux >= 0.0 ? a : b;
      add(a, up, flux);
      add(b, up, -flux);
    }
  }
  SparseMatrix m(dofs.num_velocity_dofs(), dofs.num_velocity_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

OseenSolution solve_oseen_saddle(const FaceScalarField& rho_dual_new, const FaceScalarField& rho_dual_old,
                                 const FaceVectorField& u_old, const FluxSet& fluxes,
                                 const FaceVectorField& source, double dt, const SchemeParams& params,
                                 const Discretization& disc) {
  const Mesh& mesh = disc.mesh();
  const FaceDofMap& dofs = disc.dofs();
  require_zero_boundary(u_old, mesh, "previous velocity");
  if (!(dt > 0.0)) throw SchemeError("momentum solve: dt must be positive");

  const int nu = dofs.num_velocity_dofs();
  const int nc = mesh.num_cells();
  const Eigen::VectorXd vol = dual_volumes(disc);
  const Eigen::VectorXd rho_new = per_dof(rho_dual_new, dofs);
  const Eigen::VectorXd rho_old = per_dof(rho_dual_old, dofs);

  const SparseMatrix momentum = SparseMatrix(diagonal(vol.cwiseProduct(rho_new) / dt)) +
                                convection_matrix(fluxes, params.convection, disc) +
                                params.viscosity * disc.stiffness();

  std::vector<Triplet> t;
  t.reserve(momentum.nonZeros() + 3 * disc.divergence().nonZeros() + 2 * nc);
  for (int r = 0; r < momentum.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(momentum, r); it; ++it) t.emplace_back(r, it.col(), it.value());
  for (int r = 0; r < disc.gradient().outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(disc.gradient(), r); it; ++it) t.emplace_back(r, nu + it.col(), it.value());
  for (int r = 0; r < disc.divergence().outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(disc.divergence(), r); it; ++it)
      t.emplace_back(nu + r, it.col(), -it.value());
  for (int k = 0; k < nc; ++k) {
    t.emplace_back(nu + k, nu + nc, mesh.cell(k).volume);
    t.emplace_back(nu + nc, nu + k, mesh.cell(k).volume);
  }
  ColMatrix m(nu + nc + 1, nu + nc + 1);
  m.setFromTriplets(t.begin(), t.end());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu + nc + 1);
  rhs.head(nu) = vol.cwiseProduct(rho_old).cwiseProduct(dofs.gather(u_old)) / dt +
                 vol.cwiseProduct(dofs.gather(source));

  const Eigen::VectorXd x = solve_sparse(m, rhs, "momentum saddle system " + describe(mesh, dt));
  OseenSolution out;
  out.u = dofs.scatter(x.head(nu), mesh.num_faces());
  out.p = CellScalarField(Eigen::VectorXd(x.segment(nu, nc)));
  return out;
}

OseenSolution solve_oseen_saddle(const CellScalarField& rho_new, const FaceScalarField& rho_dual_old,
                                 const FaceVectorField& u_old, const FaceVectorField& u_conv, double dt,
                                 const SchemeParams& params, const Discretization& disc, double t_new) {
  const Mesh& mesh = disc.mesh();
  const FluxSet fluxes = compute_fluxes(rho_new, u_conv, mesh);
  return solve_oseen_saddle(dual_density(rho_new, mesh), rho_dual_old, u_old, fluxes,
                            source_field(params.source, t_new, mesh), dt, params, disc);
}

OseenSolution project_divergence_free(const FaceVectorField& w, const FaceScalarField& rho_dual, double dt,
                                      const Discretization& disc) {
  const Mesh& mesh = disc.mesh();
  const FaceDofMap& dofs = disc.dofs();
  const int nc = mesh.num_cells();
  // u = w - W G p with W = dt / (rho_D |D|); B u = 0 gives (B W G) p = B w.
  const Eigen::VectorXd weight = (dt * per_dof(rho_dual, dofs).cwiseProduct(dual_volumes(disc)).cwiseInverse());
  const SparseMatrix wg = diagonal(weight) * disc.gradient();
  const SparseMatrix poisson = disc.divergence() * wg;

  std::vector<Triplet> t;
  t.reserve(poisson.nonZeros() + 2 * nc);
  for (int r = 0; r < poisson.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(poisson, r); it; ++it) t.emplace_back(r, it.col(), it.value());
  for (int k = 0; k < nc; ++k) {
    t.emplace_back(k, nc, mesh.cell(k).volume);
    t.emplace_back(nc, k, mesh.cell(k).volume);
  }
  ColMatrix m(nc + 1, nc + 1);
  m.setFromTriplets(t.begin(), t.end());

  const Eigen::VectorXd wv = dofs.gather(w);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc + 1);
  rhs.head(nc) = disc.divergence() * wv;
  const Eigen::VectorXd x = solve_sparse(m, rhs, "pressure system " + describe(mesh, dt));

  OseenSolution out;
  out.p = CellScalarField(Eigen::VectorXd(x.head(nc)));
  out.u = dofs.scatter(wv - wg * out.p.values, mesh.num_faces());
  return out;
}

double cfl_dt(const FaceVectorField& u, double mu, const Mesh& mesh, double c, double cap) {
  if (!(c > 0.0 && c <= 1.0)) throw SchemeError("CFL safety factor must lie in (0, 1]");
  std::vector<double> diag(mesh.num_faces(), 0.0);
  std::vector<double> dual_perimeter(mesh.num_faces(), 0.0);
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Eigen::Matrix4d a = cell_stiffness(mesh, k);
    for (int i = 0; i < 4; ++i) {
      const int f = mesh.cell(k).faces[i];
      diag[f] += a(i, i);
      dual_perimeter[f] += mesh.dual_face(k, i).measure + mesh.dual_face(k, (i + 1) % 4).measure;
    }
  }
  double bound = c * cap;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    if (!fc.is_internal()) continue;
    // Convective length |D| / (dual perimeter), viscous length^2 |D| / A_ss.
    const double rate = u[f].norm() * dual_perimeter[f] / fc.dual_volume + mu * diag[f] / fc.dual_volume;
    if (rate > 0.0) bound = std::min(bound, c / rate);
  }
  return bound;
}

double implicit_residual(const State& old_state, const State& candidate, const SchemeParams& params,
                         const Discretization& disc) {
  const Mesh& mesh = disc.mesh();
  const FaceDofMap& dofs = disc.dofs();
  const double dt = params.dt;
  const FluxSet fluxes = compute_fluxes(candidate.rho, candidate.u, mesh);

  double mass_num = 0.0, mass_den = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double vol = mesh.cell(k).volume / dt;
    double flux = 0.0, flux_abs = 0.0;
    for (int i = 0; i < 4; ++i) {
      flux += fluxes.primal_flux(k, i);
      flux_abs += std::abs(fluxes.primal_flux(k, i));
    }
    mass_num = std::max(mass_num, std::abs(vol * (candidate.rho[k] - old_state.rho[k]) + flux));
    mass_den = std::max(mass_den, vol * std::max(std::abs(candidate.rho[k]), std::abs(old_state.rho[k])) + flux_abs);
  }

  const Eigen::VectorXd vol = dual_volumes(disc);
  const Eigen::VectorXd u = dofs.gather(candidate.u);
  const Eigen::VectorXd time_new =
      vol.cwiseProduct(per_dof(dual_density(candidate.rho, mesh), dofs)).cwiseProduct(u) / dt;
  const Eigen::VectorXd time_old =
      vol.cwiseProduct(per_dof(old_state.rho_dual, dofs)).cwiseProduct(dofs.gather(old_state.u)) / dt;
  const Eigen::VectorXd conv = convection_matrix(fluxes, params.convection, disc) * u;
  const Eigen::VectorXd diff = params.viscosity * (disc.stiffness() * u);
  const Eigen::VectorXd grad = disc.gradient() * candidate.p.values;
  const Eigen::VectorXd src =
      vol.cwiseProduct(dofs.gather(source_field(params.source, candidate.time, mesh)));
  const Eigen::VectorXd mom = time_new - time_old + conv + diff + grad - src;
  const Eigen::VectorXd mom_scale = time_new.cwiseAbs() + time_old.cwiseAbs() + conv.cwiseAbs() +
                                    diff.cwiseAbs() + grad.cwiseAbs() + src.cwiseAbs();

  const Eigen::VectorXd div = disc.divergence() * u;
  const Eigen::VectorXd div_scale = abs_matrix(disc.divergence()) * u.cwiseAbs();

  const auto max_abs = [](const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };
  return std::max({ratio(mass_num, mass_den), ratio(max_abs(mom), max_abs(mom_scale)),
                   ratio(max_abs(div), max_abs(div_scale))});
}

namespace {

struct PicardIterate {
  State state;
  FluxSet fluxes;
};

// One linearized pass: mass balance and momentum convected by u_conv.
PicardIterate picard_iterate(const State& old, const FaceVectorField& u_conv, const FaceVectorField& source,
                             const SchemeParams& params, const Discretization& disc) {
  const Mesh& mesh = disc.mesh();
  PicardIterate it;
  it.state.time = old.time + params.dt;
  it.state.rho = solve_mass_upwind(old.rho, u_conv, params.dt, mesh);
  it.state.rho_dual = dual_density(it.state.rho, mesh);
  it.fluxes = compute_fluxes(it.state.rho, u_conv, mesh);
  OseenSolution sol =
      solve_oseen_saddle(it.state.rho_dual, old.rho_dual, old.u, it.fluxes, source, params.dt, params, disc);
  it.state.u = std::move(sol.u);
  it.state.p = std::move(sol.p);
  return it;
}

}  // namespace

StepResult step_implicit(const State& state, const SchemeParams& params, const Discretization& disc) {
  params.validate();
  check_state(state, disc.mesh());
  const FaceVectorField source = source_field(params.source, state.time + params.dt, disc.mesh());
  StepResult result;
  FaceVectorField u_conv = state.u;
  double omega = 1.0;
  for (int k = 1; k <= params.picard_max_iter; ++k) {
    PicardIterate it = picard_iterate(state, u_conv, source, params, disc);
    const double res = implicit_residual(state, it.state, params, disc);
    result.residual_history.push_back(res);
    if (res <= params.picard_tol) {
      result.state = std::move(it.state);
      result.fluxes = std::move(it.fluxes);
      result.u_conv = std::move(u_conv);
      result.iterations = k;
      return result;
    }
    const auto& h = result.residual_history;
    if (h.size() >= 2 && h.back() >= h[h.size() - 2]) omega = std::max(0.5 * omega, 1.0 / 64.0);
    if (omega == 1.0)
      u_conv = it.state.u;
    else
      u_conv = u_conv + omega * (it.state.u - u_conv);
  }
  std::ostringstream os;
  os << "Picard iteration did not converge in " << params.picard_max_iter << " iterations at t = "
     << state.time + params.dt << " (last residual " << result.residual_history.back() << ", tolerance "
     << params.picard_tol << ")";
  throw ConvergenceError(os.str(), result.residual_history);
}

StepResult step_semi_implicit(const State& state, const SchemeParams& params, const Discretization& disc) {
  params.validate();
  check_state(state, disc.mesh());
  const FaceVectorField source = source_field(params.source, state.time + params.dt, disc.mesh());
  PicardIterate it = picard_iterate(state, state.u, source, params, disc);
  StepResult result;
  result.residual_history.push_back(implicit_residual(state, it.state, params, disc));
  result.state = std::move(it.state);
  result.fluxes = std::move(it.fluxes);
  result.u_conv = state.u;
  return result;
}

StepResult step_explicit(const State& state, const SchemeParams& params, const Discretization& disc) {
  params.validate();
  const Mesh& mesh = disc.mesh();
  check_state(state, mesh);
  const double rho_min = state.rho_dual.values.minCoeff();
  if (!(rho_min > 0.0)) throw SchemeError("explicit scheme needs a positive density");
  const double bound = cfl_dt(state.u, params.viscosity / rho_min, mesh, params.cfl_safety, params.end_time);
  if (params.dt > bound) throw CflError(params.dt, bound);

  const FaceDofMap& dofs = disc.dofs();
  const double dt = params.dt;
  StepResult result;
  result.u_conv = state.u;
  State& s = result.state;
  s.time = state.time + dt;
  s.rho = solve_mass_upwind(state.rho, state.u, dt, mesh);
  s.rho_dual = dual_density(s.rho, mesh);
  result.fluxes = compute_fluxes(s.rho, state.u, mesh);

  const Eigen::VectorXd vol = dual_volumes(disc);
  const Eigen::VectorXd u_old = dofs.gather(state.u);
  const Eigen::VectorXd explicit_terms = convection_matrix(result.fluxes, ConvectionMode::Upwind, disc) * u_old +
                                         params.viscosity * (disc.stiffness() * u_old);
  const Eigen::VectorXd src = vol.cwiseProduct(dofs.gather(source_field(params.source, s.time, mesh)));
  const Eigen::VectorXd rho_new = per_dof(s.rho_dual, dofs);
  const Eigen::VectorXd momentum =
      vol.cwiseProduct(per_dof(state.rho_dual, dofs)).cwiseProduct(u_old) - dt * (explicit_terms - src);
  const Eigen::VectorXd u_star = momentum.cwiseQuotient(vol.cwiseProduct(rho_new));
  result.u_predicted = dofs.scatter(u_star, mesh.num_faces());

  OseenSolution sol = project_divergence_free(result.u_predicted, s.rho_dual, dt, disc);
  s.u = std::move(sol.u);
  s.p = std::move(sol.p);
  return result;
}

StepResult step_projection(const State& state, const SchemeParams& params, const Discretization& disc) {
  params.validate();
  const Mesh& mesh = disc.mesh();
  check_state(state, mesh);
  const FaceDofMap& dofs = disc.dofs();
  const double dt = params.dt;
  StepResult result;
  result.u_conv = state.u;
  State& s = result.state;
  s.time = state.time + dt;
  s.rho = solve_mass_upwind(state.rho, state.u, dt, mesh);
  s.rho_dual = dual_density(s.rho, mesh);
  result.fluxes = compute_fluxes(s.rho, state.u, mesh);

  // Scaled old pressure gradient sqrt(rho^n / rho^{n-1}) grad p^{n-1}.
  FaceVectorField scaled_grad = gradient(state.p, mesh);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.face(f).is_internal()) continue;
    scaled_grad.set(f, std::sqrt(s.rho_dual[f] / state.rho_dual[f]) * scaled_grad[f]);
  }
  // The prediction is the saddle solve without the constraint; the source
  // absorbs the explicit pressure term.
  FaceVectorField rhs = source_field(params.source, s.time, mesh) - scaled_grad;
  const Eigen::VectorXd vol = dual_volumes(disc);
  const SparseMatrix momentum =
      SparseMatrix(diagonal(vol.cwiseProduct(per_dof(s.rho_dual, dofs)) / dt)) +
      convection_matrix(result.fluxes, params.convection, disc) + params.viscosity * disc.stiffness();
  const Eigen::VectorXd b = vol.cwiseProduct(per_dof(state.rho_dual, dofs))
                                .cwiseProduct(dofs.gather(state.u)) / dt +
                            vol.cwiseProduct(dofs.gather(rhs));
  ColMatrix m = ColMatrix(momentum);
  m.makeCompressed();
  const Eigen::VectorXd u_tilde = solve_sparse(m, b, "prediction system " + describe(mesh, dt));
  result.u_predicted = dofs.scatter(u_tilde, mesh.num_faces());

  // Correction: w = u~ + dt/rho^n scaled grad p^{n-1}, then project.
  FaceVectorField w = result.u_predicted;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.face(f).is_internal()) continue;
    w.set(f, w[f] + dt / s.rho_dual[f] * scaled_grad[f]);
  }
  OseenSolution sol = project_divergence_free(w, s.rho_dual, dt, disc);
  s.u = std::move(sol.u);
  s.p = std::move(sol.p);
  return result;
}

StepResult step(const State& state, const SchemeParams& params, const Discretization& disc) {
  switch (params.kind) {
    case SchemeKind::Implicit: return step_implicit(state, params, disc);
    case SchemeKind::SemiImplicit: return step_semi_implicit(state, params, disc);
    case SchemeKind::Explicit: return step_explicit(state, params, disc);
    case SchemeKind::Projection: return step_projection(state, params, disc);
  }
  throw SchemeError("unknown scheme kind");
}

}  // namespace stagflow
