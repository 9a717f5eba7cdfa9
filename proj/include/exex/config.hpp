#pragma once

#include <stdexcept>
#include <string>

#include "exex/harness.hpp"
#include "exex/problems.hpp"
#include "exex/types.hpp"

namespace exex {

inline constexpr const char* kVersion = "0.1.0";

/// Raised for any malformed run configuration; the message names the
/// offending key path. The CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved run configuration: the JSON document with defaults
/// applied. Parsing is fail-closed — unknown keys anywhere in the document
/// are rejected by dotted path.
struct CliConfig {
  std::string problem = "sphere";
  int p = 2;
  long n1_budget = 0;  ///< 0 resolves per stage (100 p; demo 800)
  int n0 = 0;          ///< 0 resolves per stage (10 p; demo 30)
  std::uint64_t seed = 12345;
  int threads = 0;
  int verbosity = 1;

  // expansion group
  long attempt_cap = 100000;
  int dft_cadence = 10;
  int stall_limit = 10;
  int adaptive_cap_per_p = 200;

  // surrogate group
  GpOptions gp;

  // optimize group
  double t_ei_factor = 1e-5;

  // bench group
  int replications = 30;
  int lhd_restarts = 10;

  // crystal group
  int n_atoms = 8;
  double v_ref = 16.6;
  double min_sep = 2.0;
  double vol_jitter = 0.05;
  double max_disp = 1.0;
  double perturb_floor = 0.5;
  std::string species = "Al";
  LjParams lj;
  AgniParams agni;

  ProblemKind kind() const { return parse_problem(problem); }
  RunConfig to_run_config() const;
  BenchmarkSpec to_benchmark_spec() const;
  CrystalDemoConfig to_demo_config() const;
};

/// Parse and validate a JSON configuration document. Throws ConfigError
/// (naming the key path) on unknown keys, type mismatches, or out-of-range
/// values.
CliConfig parse_cli_config(const std::string& json_text);

/// Read and parse a configuration file.
CliConfig load_cli_config(const std::string& path);

/// The fully resolved configuration as a JSON document (the run_meta
/// payload): every knob with defaults applied, the seed, and the version.
std::string run_meta_json(const CliConfig& config, const std::string& subcommand);

}  // namespace exex
