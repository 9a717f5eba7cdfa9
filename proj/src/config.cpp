#include "exex/config.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "exex/csvio.hpp"

namespace exex {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config key '" + path + "': " + what);
}

/// Reads one JSON object fail-closed: every key must be consumed by a typed
/// getter, and finish() rejects leftovers by dotted path.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) {
      throw ConfigError("config value '" + (path_.empty() ? "<root>" : path_) +
                        "' must be a JSON object");
    }
  }

  std::string key_path(const std::string& name) const {
    return path_.empty() ? name : path_ + "." + name;
  }

  const json* take(const std::string& name) {
    seen_.insert(name);
    const auto it = obj_.find(name);
    return it == obj_.end() ? nullptr : &it.value();
  }

  void read_int(const std::string& name, int& target, long long lo, long long hi) {
    const json* v = take(name);
    if (v == nullptr) return;
    if (!v->is_number_integer() && !v->is_number_unsigned()) {
      fail(key_path(name), "expected an integer");
    }
    const long long raw = v->get<long long>();
    if (raw < lo || raw > hi) {
      fail(key_path(name), "must be in [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
    }
    target = static_cast<int>(raw);
  }

  void read_long(const std::string& name, long& target, long long lo, long long hi) {
    const json* v = take(name);
    if (v == nullptr) return;
    if (!v->is_number_integer() && !v->is_number_unsigned()) {
      fail(key_path(name), "expected an integer");
    }
    const long long raw = v->get<long long>();
    if (raw < lo || raw > hi) {
      fail(key_path(name), "must be in [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
    }
    target = static_cast<long>(raw);
  }

  void read_u64(const std::string& name, std::uint64_t& target) {
    const json* v = take(name);
    if (v == nullptr) return;
    if (v->is_number_unsigned()) {
      target = v->get<std::uint64_t>();
      return;
    }
    if (v->is_number_integer()) {
      const long long raw = v->get<long long>();
      if (raw < 0) fail(key_path(name), "must be non-negative");
      target = static_cast<std::uint64_t>(raw);
      return;
    }
    fail(key_path(name), "expected a non-negative integer");
  }

  void read_double(const std::string& name, double& target, double lo, double hi,
                   bool lo_open = false) {
    const json* v = take(name);
    if (v == nullptr) return;
    if (!v->is_number()) fail(key_path(name), "expected a number");
    const double raw = v->get<double>();
    if (!std::isfinite(raw) || raw < lo || raw > hi || (lo_open && raw == lo)) {
      fail(key_path(name), "must be a finite number in " +
                               std::string(lo_open ? "(" : "[") +
                               fmt_g12(lo) + ", " + fmt_g12(hi) + "]");
    }
    target = raw;
  }

  void read_bool(const std::string& name, bool& target) {
    const json* v = take(name);
    if (v == nullptr) return;
    if (!v->is_boolean()) fail(key_path(name), "expected true or false");
    target = v->get<bool>();
  }

  void read_string(const std::string& name, std::string& target) {
    const json* v = take(name);
    if (v == nullptr) return;
    if (!v->is_string()) fail(key_path(name), "expected a string");
    target = v->get<std::string>();
    if (target.empty()) fail(key_path(name), "must not be empty");
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (seen_.find(item.key()) == seen_.end()) {
        throw ConfigError("unknown config key '" + key_path(item.key()) + "'");
      }
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_expansion_group(ObjectReader& root, CliConfig& cfg) {
  const json* group = root.take("expansion");
  if (group == nullptr) return;
  ObjectReader r(*group, root.key_path("expansion"));
  r.read_long("attempt_cap", cfg.attempt_cap, 1, 1000000000LL);
  r.read_int("dft_cadence", cfg.dft_cadence, 1, 1000000);
  r.read_int("stall_limit", cfg.stall_limit, 1, 1000000);
  r.read_int("adaptive_cap_per_p", cfg.adaptive_cap_per_p, 1, 1000000);
  r.finish();
}

void read_surrogate_group(ObjectReader& root, CliConfig& cfg) {
  const json* group = root.take("surrogate");
  if (group == nullptr) return;
  ObjectReader r(*group, root.key_path("surrogate"));
  r.read_double("nugget", cfg.gp.nugget, 0.0, 1.0, /*lo_open=*/true);
  r.read_bool("anisotropic", cfg.gp.anisotropic);
  r.read_int("starts", cfg.gp.starts, 1, 1000);
  r.read_int("max_iter", cfg.gp.max_iter, 1, 100000);
  r.read_double("tol", cfg.gp.tol, 0.0, 1.0, /*lo_open=*/true);
  r.read_bool("scale_effort", cfg.gp.scale_effort);
  r.finish();
}

void read_optimize_group(ObjectReader& root, CliConfig& cfg) {
  const json* group = root.take("optimize");
  if (group == nullptr) return;
  ObjectReader r(*group, root.key_path("optimize"));
  r.read_double("t_ei_factor", cfg.t_ei_factor, 0.0, 1.0, /*lo_open=*/true);
  r.finish();
}

void read_bench_group(ObjectReader& root, CliConfig& cfg) {
  const json* group = root.take("bench");
  if (group == nullptr) return;
  ObjectReader r(*group, root.key_path("bench"));
  r.read_int("replications", cfg.replications, 1, 100000);
  r.read_int("lhd_restarts", cfg.lhd_restarts, 1, 10000);
  r.finish();
}

void read_crystal_group(ObjectReader& root, CliConfig& cfg) {
  const json* group = root.take("crystal");
  if (group == nullptr) return;
  ObjectReader r(*group, root.key_path("crystal"));
  r.read_int("n_atoms", cfg.n_atoms, 1, 1000);
  r.read_double("v_ref", cfg.v_ref, 0.0, 1e6, /*lo_open=*/true);
  r.read_double("min_sep", cfg.min_sep, 0.0, 100.0, /*lo_open=*/true);
  r.read_double("vol_jitter", cfg.vol_jitter, 0.0, 0.9);
  r.read_double("max_disp", cfg.max_disp, 0.0, 100.0, /*lo_open=*/true);
  r.read_double("perturb_floor", cfg.perturb_floor, 0.0, 100.0);
  r.read_string("species", cfg.species);
  if (const json* lj = r.take("lj")) {
    ObjectReader l(*lj, r.key_path("lj"));
    l.read_double("epsilon", cfg.lj.epsilon, 0.0, 1e6, /*lo_open=*/true);
    l.read_double("sigma", cfg.lj.sigma, 0.0, 100.0, /*lo_open=*/true);
    l.read_double("r_cut", cfg.lj.r_cut, 0.0, 1000.0, /*lo_open=*/true);
    l.finish();
  }
  if (const json* agni = r.take("agni")) {
    ObjectReader a(*agni, r.key_path("agni"));
    a.read_int("n_widths", cfg.agni.n_widths, 1, 1024);
    a.read_double("sigma_min", cfg.agni.sigma_min, 0.0, 1000.0, /*lo_open=*/true);
    a.read_double("sigma_max", cfg.agni.sigma_max, 0.0, 1000.0, /*lo_open=*/true);
    a.read_double("r_cut", cfg.agni.r_cut, 0.0, 1000.0, /*lo_open=*/true);
    a.finish();
    if (cfg.agni.sigma_max < cfg.agni.sigma_min) {
      fail(a.key_path("sigma_max"), "must be >= sigma_min");
    }
  }
  r.finish();
}

}  // namespace

CliConfig parse_cli_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  CliConfig cfg;
  ObjectReader root(doc, "");
  root.read_string("problem", cfg.problem);
  try {
    (void)parse_problem(cfg.problem);
  } catch (const std::exception& e) {
    fail("problem", e.what());
  }
  root.read_int("p", cfg.p, 1, 100000);
  root.read_long("n1_budget", cfg.n1_budget, 0, 100000000LL);
  root.read_int("n0", cfg.n0, 0, 100000000LL);
  root.read_u64("seed", cfg.seed);
  root.read_int("threads", cfg.threads, 0, 4096);
  root.read_int("verbosity", cfg.verbosity, 0, 2);
  read_expansion_group(root, cfg);
  read_surrogate_group(root, cfg);
  read_optimize_group(root, cfg);
  read_bench_group(root, cfg);
  read_crystal_group(root, cfg);
  root.finish();

  if (cfg.kind() == ProblemKind::branin && cfg.p != 2) {
    fail("p", "the branin problem is two-dimensional");
  }
  if (cfg.kind() == ProblemKind::lj_crystal && cfg.p != cfg.agni.dim() && cfg.p != 2) {
    // For the crystal problem p is derived from the fingerprint; accept the
    // default (2) or the matching dimension, reject anything else.
    fail("p", "for the crystal problem p is fixed by crystal.agni (2*n_widths)");
  }
  return cfg;
}

CliConfig load_cli_config(const std::string& path) {
  return parse_cli_config(read_text_file(path));
}

RunConfig CliConfig::to_run_config() const {
  RunConfig rc;
  rc.p = kind() == ProblemKind::lj_crystal ? agni.dim() : p;
  rc.n1_budget = n1_budget;
  rc.n0 = n0;
  rc.dft_cadence = dft_cadence;
  rc.stall_limit = stall_limit;
  rc.t_ei_factor = t_ei_factor;
  rc.rng_seed = seed;
  rc.attempt_cap = attempt_cap;
  rc.adaptive_cap_per_p = adaptive_cap_per_p;
  rc.threads = threads;
  rc.gp = gp;
  return rc;
}

BenchmarkSpec CliConfig::to_benchmark_spec() const {
  BenchmarkSpec spec;
  spec.problem = kind();
  spec.p = p;
  spec.n1 = n1_budget;
  spec.replications = replications;
  spec.lhd_restarts = lhd_restarts;
  spec.run = to_run_config();
  return spec;
}

CrystalDemoConfig CliConfig::to_demo_config() const {
  CrystalDemoConfig demo;
  demo.n0 = n0 > 0 ? n0 : demo.n0;
  demo.n1 = n1_budget > 0 ? n1_budget : demo.n1;
  demo.n_atoms = n_atoms;
  demo.v_ref = v_ref;
  demo.min_sep = min_sep;
  demo.vol_jitter = vol_jitter;
  demo.max_disp = max_disp;
  demo.perturb_floor = perturb_floor;
  demo.species = species;
  demo.lj = lj;
  demo.agni = agni;
  demo.run = to_run_config();
  return demo;
}

std::string run_meta_json(const CliConfig& config, const std::string& subcommand) {
  ordered_json j;
  j["version"] = kVersion;
  j["subcommand"] = subcommand;
  j["problem"] = config.problem;
  j["p"] = config.p;
  j["n1_budget"] = config.n1_budget;
  j["n0"] = config.n0;
  j["seed"] = config.seed;
  j["threads"] = config.threads;
  j["verbosity"] = config.verbosity;
  j["expansion"] = {{"attempt_cap", config.attempt_cap},
                    {"dft_cadence", config.dft_cadence},
                    {"stall_limit", config.stall_limit},
                    {"adaptive_cap_per_p", config.adaptive_cap_per_p}};
  j["surrogate"] = {{"nugget", config.gp.nugget},
                    {"anisotropic", config.gp.anisotropic},
                    {"starts", config.gp.starts},
                    {"max_iter", config.gp.max_iter},
                    {"tol", config.gp.tol},
                    {"scale_effort", config.gp.scale_effort}};
  j["optimize"] = {{"t_ei_factor", config.t_ei_factor}};
  j["bench"] = {{"replications", config.replications},
                {"lhd_restarts", config.lhd_restarts}};
  j["crystal"] = {{"n_atoms", config.n_atoms},
                  {"v_ref", config.v_ref},
                  {"min_sep", config.min_sep},
                  {"vol_jitter", config.vol_jitter},
                  {"max_disp", config.max_disp},
                  {"perturb_floor", config.perturb_floor},
                  {"species", config.species},
                  {"lj",
                   {{"epsilon", config.lj.epsilon},
                    {"sigma", config.lj.sigma},
                    {"r_cut", config.lj.r_cut}}},
                  {"agni",
                   {{"n_widths", config.agni.n_widths},
                    {"sigma_min", config.agni.sigma_min},
                    {"sigma_max", config.agni.sigma_max},
                    {"r_cut", config.agni.r_cut}}}};
  return j.dump(2) + "\n";
}

}  // namespace exex
