#include "stagflow/cli.hpp"

#include "stagflow/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace stagflow {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Simulate: return "simulate";
    case RunMode::Verify: return "verify";
    case RunMode::Convergence: return "convergence";
    case RunMode::InfSup: return "infsup";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "simulate") return RunMode::Simulate;
  if (s == "verify") return RunMode::Verify;
  if (s == "convergence") return RunMode::Convergence;
  if (s == "infsup") return RunMode::InfSup;
  throw ConfigError("unknown mode '" + s + "'");
}

namespace {

const std::map<std::string, std::set<std::string>> kKeys{
    {"mesh", {"type", "nx", "ny", "x0", "y0", "x1", "y1", "file", "perturb_magnitude", "perturb_seed", "level"}},
    {"scheme",
     {"kind", "dt", "end_time", "viscosity", "picard_tol", "picard_max_iter", "cfl_safety", "convection"}},
    {"initial", {"preset", "amplitude", "rho", "rho_left", "rho_right", "rho_file", "u_file"}},
    {"output", {"directory", "every", "vtk", "csv", "budgets"}},
    {"run", {"mode", "hard_fail", "levels", "seed"}},
};

const std::set<std::string> kPresets{"rest", "lock_exchange", "decaying_vortex", "transported_vortex", "file"};

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void get(const std::string& section, const std::string& key, T& out) const {
    const auto value = tree_.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
    if (!value) return;
    try {
      out = convert<T>(*value);
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + ": cannot parse '" + *value + "'");
    }
  }

 private:
  template <class T>
  static T convert(const std::string& s) {
    std::size_t pos = 0;
    if constexpr (std::is_same_v<T, std::string>) {
      return s;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
      if (s == "false" || s == "no" || s == "0" || s == "off") return false;
      throw std::invalid_argument(s);
    } else if constexpr (std::is_same_v<T, int>) {
      const int v = std::stoi(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
      const unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } else {
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    }
  }

  const pt::ptree& tree_;
};

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).string();
}

RunConfig parse_tree(const pt::ptree& tree, const std::string& base_dir) {
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside a section");
    const auto it = kKeys.find(section);
    if (it == kKeys.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      if (!value.empty()) throw ConfigError("nested key under '" + key + "' in [" + section + "]");
    }
  }
  const Reader r(tree);
  RunConfig c;
  std::string mode = to_string(c.mode);
  r.get("run", "mode", mode);
  c.mode = parse_run_mode(mode);
  r.get("run", "hard_fail", c.hard_fail);
  r.get("run", "levels", c.levels);
  r.get("run", "seed", c.seed);

  r.get("mesh", "type", c.mesh.type);
  r.get("mesh", "nx", c.mesh.nx);
  r.get("mesh", "ny", c.mesh.ny);
  r.get("mesh", "x0", c.mesh.domain.x0);
  r.get("mesh", "y0", c.mesh.domain.y0);
  r.get("mesh", "x1", c.mesh.domain.x1);
  r.get("mesh", "y1", c.mesh.domain.y1);
  r.get("mesh", "file", c.mesh.file);
  c.mesh.file = resolve(c.mesh.file, base_dir);
  r.get("mesh", "perturb_magnitude", c.mesh.perturb_magnitude);
  r.get("mesh", "perturb_seed", c.mesh.perturb_seed);
  r.get("mesh", "level", c.mesh.level);

  std::string kind = to_string(c.scheme.kind), convection = to_string(c.scheme.convection);
  r.get("scheme", "kind", kind);
  r.get("scheme", "convection", convection);
  try {
    c.scheme.kind = parse_scheme_kind(kind);
    c.scheme.convection = parse_convection_mode(convection);
  } catch (const SchemeError& e) {
    throw ConfigError(std::string("[scheme] ") + e.what());
  }
  r.get("scheme", "dt", c.scheme.dt);
  r.get("scheme", "end_time", c.scheme.end_time);
  r.get("scheme", "viscosity", c.scheme.viscosity);
  r.get("scheme", "picard_tol", c.scheme.picard_tol);
  r.get("scheme", "picard_max_iter", c.scheme.picard_max_iter);
  r.get("scheme", "cfl_safety", c.scheme.cfl_safety);

  r.get("initial", "preset", c.initial.preset);
  r.get("initial", "amplitude", c.initial.amplitude);
  r.get("initial", "rho", c.initial.rho);
  r.get("initial", "rho_left", c.initial.rho_left);
  r.get("initial", "rho_right", c.initial.rho_right);
  r.get("initial", "rho_file", c.initial.rho_file);
  r.get("initial", "u_file", c.initial.u_file);
  c.initial.rho_file = resolve(c.initial.rho_file, base_dir);
  c.initial.u_file = resolve(c.initial.u_file, base_dir);

  r.get("output", "directory", c.output.directory);
  r.get("output", "every", c.output.every);
  r.get("output", "vtk", c.output.vtk);
  r.get("output", "csv", c.output.csv);
  r.get("output", "budgets", c.output.budgets);

  c.validate();
  return c;
}

}  // namespace

void RunConfig::validate() const {
  if (mesh.type == "cartesian") {
    if (mesh.nx < 1 || mesh.ny < 1) throw ConfigError("[mesh] nx and ny must be at least 1");
    if (!(mesh.domain.x1 > mesh.domain.x0 && mesh.domain.y1 > mesh.domain.y0))
      throw ConfigError("[mesh] degenerate domain");
  } else if (mesh.type == "file") {
    if (mesh.file.empty()) throw ConfigError("[mesh] type = file needs 'file'");
  } else {
    throw ConfigError("[mesh] unknown type '" + mesh.type + "'");
  }
  if (mesh.level < 0) throw ConfigError("[mesh] level must be nonnegative");
  if (mesh.perturb_magnitude < 0.0 || mesh.perturb_magnitude >= 0.5)
    throw ConfigError("[mesh] perturb_magnitude must lie in [0, 0.5)");
  try {
    scheme.validate();
  } catch (const SchemeError& e) {
    throw ConfigError(std::string("[scheme] ") + e.what());
  }
  if (!kPresets.count(initial.preset)) throw ConfigError("[initial] unknown preset '" + initial.preset + "'");
  if (initial.preset == "file" && (initial.rho_file.empty() || initial.u_file.empty()))
    throw ConfigError("[initial] preset = file needs rho_file and u_file");
  if (!(initial.rho > 0.0 && initial.rho_left > 0.0 && initial.rho_right > 0.0))
    throw ConfigError("[initial] densities must be positive");
  if (output.every < 0) throw ConfigError("[output] every must be nonnegative");
  if (output.directory.empty()) throw ConfigError("[output] directory must not be empty");
  if (levels < 1) throw ConfigError("[run] levels must be at least 1");
  if (mode == RunMode::Convergence && initial.preset != "decaying_vortex" && initial.preset != "transported_vortex")
    throw ConfigError("convergence mode needs a vortex preset with a known exact solution");
}

RunConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_tree(tree, "");
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_tree(tree, fs::path(path).parent_path().string());
}

Mesh build_mesh(const MeshSpec& spec) {
  Mesh mesh = spec.type == "file" ? load_mesh(spec.file) : build_cartesian(spec.nx, spec.ny, spec.domain);
  if (spec.perturb_magnitude > 0.0) mesh = perturb(mesh, spec.perturb_magnitude, spec.perturb_seed);
  for (int l = 0; l < spec.level; ++l) mesh = refine(mesh);
  return mesh;
}

std::optional<ExactSolution> preset_solution(const InitialSpec& spec, double mu) {
  if (spec.preset == "decaying_vortex") return decaying_vortex(spec.amplitude, mu);
  if (spec.preset == "transported_vortex") return transported_vortex(spec.amplitude, mu);
  return std::nullopt;
}

State initial_state(const InitialSpec& spec, const Mesh& mesh, double mu) {
  if (spec.preset == "rest")
    return make_state(mesh, CellScalarField(mesh.num_cells(), spec.rho), FaceVectorField(mesh.num_faces()));
  if (spec.preset == "lock_exchange") return lock_exchange_state(mesh, spec.amplitude, spec.rho_left, spec.rho_right);
  if (const auto exact = preset_solution(spec, mu)) return exact_state(*exact, mesh, 0.0);
  std::ifstream rs(spec.rho_file), us(spec.u_file);
  if (!rs) throw IoError("cannot read " + spec.rho_file);
  if (!us) throw IoError("cannot read " + spec.u_file);
  CellScalarField rho(read_csv_column(rs, "rho", mesh.num_cells()));
  std::stringstream copy;
  copy << us.rdbuf();
  FaceVectorField u(mesh.num_faces());
  u.x = read_csv_column(copy, "ux", mesh.num_faces());
  copy.clear();
  copy.seekg(0);
  u.y = read_csv_column(copy, "uy", mesh.num_faces());
  if (!has_zero_boundary(u, mesh)) throw ConfigError("[initial] u_file has nonzero boundary velocity");
  return make_state(mesh, std::move(rho), std::move(u));
}

namespace {

std::string numbered(const std::string& stem, int n, const std::string& ext) {
  std::ostringstream os;
  os << stem << '_' << std::setw(6) << std::setfill('0') << n << ext;
  return os.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

void write_fields(const fs::path& dir, const OutputSpec& out, const Mesh& mesh, const State& s, int n) {
  if (out.csv) {
    std::ofstream cells = open_out(dir / numbered("cells", n, ".csv"));
    std::ofstream faces = open_out(dir / numbered("faces", n, ".csv"));
    write_state_csv(cells, faces, mesh, s);
  }
  if (out.vtk) {
    std::ofstream v = open_out(dir / numbered("state", n, ".vtk"));
    write_vtk(v, mesh, s);
  }
}

struct Violation {
  bool any = false;
  std::ostringstream message;
};

template <class Vec>
int argmax_abs(const Vec& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

int simulate(const RunConfig& c, const Mesh& mesh, const fs::path& dir, std::ostream& log) {
  const Discretization disc(mesh);
  SchemeParams params = c.scheme;
  const auto exact = preset_solution(c.initial, params.viscosity);
  if (exact) params.source = exact->source;
  State s = initial_state(c.initial, mesh, params.viscosity);

  const int steps = static_cast<int>(std::lround(params.end_time / params.dt));
  const double rho_lo = s.rho.values.minCoeff(), rho_hi = s.rho.values.maxCoeff();
  const double mass0 = weighted_sum(s.rho, mesh);
  const bool energy_identity = params.kind == SchemeKind::Implicit || params.kind == SchemeKind::SemiImplicit;

  log << "simulate: " << mesh.num_cells() << " cells, scheme " << to_string(params.kind) << ", dt " << params.dt
      << ", " << steps << " steps\n";
  {
    std::ofstream m = open_out(dir / "mesh.txt");
    write_mesh(m, mesh);
  }
  std::ofstream budgets;
  if (c.output.budgets) {
    budgets = open_out(dir / "budgets.csv");
    write_budget_header(budgets);
  }
  write_fields(dir, c.output, mesh, s, 0);

  int status = kExitOk;
  for (int n = 1; n <= steps; ++n) {
    StepResult r;
    try {
      r = step(s, params, disc);
    } catch (const SchemeError& e) {
      log << "step " << n << ": " << e.what() << '\n';
      return kExitFailure;
    }
    const BudgetReport b = energy_identity ? energy_budget(s, r, params, disc)
                                           : rho_square_budget(s.rho, r.state.rho, r.u_conv, params.dt, mesh);
    Violation v;
    const Eigen::VectorXd div = divergence(r.state.u, mesh).values;
    const int kd = argmax_abs(div);
    if (std::abs(div[kd]) > 1e-11) v.message << " divergence " << div[kd] << " in cell " << kd << ';';
    Eigen::Index kmin = 0, kmax = 0;
    const double lo = r.state.rho.values.minCoeff(&kmin), hi = r.state.rho.values.maxCoeff(&kmax);
    if (lo < rho_lo - 1e-11) v.message << " density " << lo << " below " << rho_lo << " in cell " << kmin << ';';
    if (hi > rho_hi + 1e-11) v.message << " density " << hi << " above " << rho_hi << " in cell " << kmax << ';';
    const double drift = std::abs(weighted_sum(r.state.rho, mesh) - mass0) / mass0;
    if (drift > 1e-11) v.message << " mass drift " << drift << ';';
    if (b.rho2_max_residual > 1e-10)
      v.message << " rho^2 identity residual " << b.rho2_max_residual << " in cell " << argmax_abs(b.rho2_residual)
                << ';';
    if (energy_identity && b.ke_max_residual > 10 * params.picard_tol)
      v.message << " kinetic energy identity residual " << b.ke_max_residual << " at face "
                << argmax_abs(b.ke_residual) << ';';
    v.any = !v.message.str().empty();

    s = std::move(r.state);
    if (c.output.budgets) write_budget_row(budgets, n, s.time, b);
    if ((c.output.every > 0 && n % c.output.every == 0) || n == steps) write_fields(dir, c.output, mesh, s, n);
    if (v.any) {
      log << "step " << n << " violation:" << v.message.str() << '\n';
      status = kExitViolation;
      if (c.hard_fail) return status;
    }
  }
  std::ostringstream summary;
  summary << std::setprecision(10) << "final time " << s.time << ", density [" << s.rho.values.minCoeff() << ", "
          << s.rho.values.maxCoeff() << "], max |div u| " << divergence(s.u, mesh).values.cwiseAbs().maxCoeff();
  if (exact) {
    const MmsError e = mms_error(s, *exact, mesh);
    summary << ", errors rho " << e.rho_l2 << " u " << e.u_l2 << " u_broken " << e.u_broken;
  }
  log << summary.str() << '\n';
  return status;
}

int verify(const RunConfig& c, const Mesh& mesh, const fs::path& dir, std::ostream& log) {
  const auto checks = verify_suite(mesh, c.seed);
  std::ofstream csv = open_out(dir / "verify.csv");
  csv << "check,value,tolerance,passed\n" << std::setprecision(17);
  bool ok = true;
  for (const CheckResult& r : checks) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << std::setprecision(3) << std::scientific << r.value
        << " (tolerance " << r.tolerance << ")\n"
        << std::defaultfloat;
    csv << '"' << r.name << "\"," << r.value << ',' << r.tolerance << ',' << (r.passed ? 1 : 0) << '\n';
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitViolation;
}

int convergence(const RunConfig& c, const Mesh& mesh, const fs::path& dir, std::ostream& log) {
  ConvergenceConfig cc;
  cc.base = mesh;
  cc.levels = c.levels;
  cc.params = c.scheme;
  cc.exact = *preset_solution(c.initial, c.scheme.viscosity);
  const ConvergenceTable t = convergence_study(cc);
  log << t.to_text();
  std::ofstream csv = open_out(dir / "convergence.csv");
  csv << t.to_csv();
  std::ofstream txt = open_out(dir / "convergence.txt");
  txt << t.to_text();
  return kExitOk;
}

int infsup(const RunConfig& c, const Mesh& mesh, const fs::path& dir, std::ostream& log) {
  std::ofstream csv = open_out(dir / "infsup.csv");
  csv << "level,cells,h,beta\n" << std::setprecision(17);
  Mesh m = mesh;
  for (int l = 0; l < c.levels; ++l) {
    if (l > 0) m = refine(m);
    const double beta = inf_sup_constant(m);
    const double h = regularity(m).h;
    log << std::setprecision(10) << "level " << l << ": " << m.num_cells() << " cells, h = " << h
        << ", beta = " << beta << '\n';
    csv << l << ',' << m.num_cells() << ',' << h << ',' << beta << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const fs::path dir(config.output.directory);
    fs::create_directories(dir);
    const Mesh mesh = build_mesh(config.mesh);
    switch (config.mode) {
      case RunMode::Simulate: return simulate(config, mesh, dir, log);
      case RunMode::Verify: return verify(config, mesh, dir, log);
      case RunMode::Convergence: return convergence(config, mesh, dir, log);
      case RunMode::InfSup: return infsup(config, mesh, dir, log);
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace stagflow
