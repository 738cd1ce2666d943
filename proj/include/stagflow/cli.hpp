/// @file cli.hpp
/// @brief Run configuration (INI-style sections) and the batch driver.
#pragma once

#include "stagflow/diagnostics.hpp"
#include "stagflow/mesh.hpp"
#include "stagflow/timestepping.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace stagflow {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { Simulate, Verify, Convergence, InfSup };

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& s);

struct MeshSpec {
  std::string type = "cartesian";  ///< cartesian | file
  int nx = 8, ny = 8;
  Rectangle domain;
  std::string file;
  double perturb_magnitude = 0.0;
  std::uint64_t perturb_seed = 1;
  int level = 0;  ///< refinements applied after construction
};

struct InitialSpec {
  /// rest | lock_exchange | decaying_vortex | transported_vortex | file
  std::string preset = "lock_exchange";
  double amplitude = 20.0;
  double rho = 1.0;  ///< rest state density
  double rho_left = 1.0, rho_right = 3.0;
  std::string rho_file;  ///< cell CSV with a 'rho' column
  std::string u_file;    ///< face CSV with 'ux' and 'uy' columns
};

struct OutputSpec {
  std::string directory = "output";
  int every = 0;  ///< write fields every n steps; 0 writes the first and last only
  bool vtk = true;
  bool csv = true;
  bool budgets = true;
};

struct RunConfig {
  RunMode mode = RunMode::Simulate;
  MeshSpec mesh;
  SchemeParams scheme;
  InitialSpec initial;
  OutputSpec output;
  bool hard_fail = true;
  int levels = 3;  ///< convergence and infsup modes
  std::uint64_t seed = 1;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Sections [mesh], [scheme], [initial], [output], [run]; unknown sections or
/// keys are rejected. The result is validated.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

Mesh build_mesh(const MeshSpec& spec);

/// Exact solution behind a vortex preset, if any.
std::optional<ExactSolution> preset_solution(const InitialSpec& spec, double mu);

/// Initial state for the preset (zero pressure, zero boundary velocity).
State initial_state(const InitialSpec& spec, const Mesh& mesh, double mu);

/// Exit codes of run().
enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitConfig = 2, kExitFailure = 3 };

/// Executes the configured mode, writing artifacts under output.directory and
/// a human-readable log to `log`.
int run(const RunConfig& config, std::ostream& log);

}  // namespace stagflow
