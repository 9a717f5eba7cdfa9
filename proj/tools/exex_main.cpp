#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "exex/acquisition.hpp"
#include "exex/agni.hpp"
#include "exex/config.hpp"
#include "exex/crystal.hpp"
#include "exex/csvio.hpp"
#include "exex/designs.hpp"
#include "exex/expansion.hpp"
#include "exex/harness.hpp"
#include "exex/problems.hpp"
#include "exex/types.hpp"

namespace {

namespace fs = std::filesystem;
using exex::CliConfig;
using exex::ConfigError;
using ordered_json = nlohmann::ordered_json;

std::string join_out(const std::string& out_dir, const char* name) {
  return (fs::path(out_dir) / name).string();
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + out_dir +
                             "': " + ec.message());
  }
}

void write_meta(const CliConfig& cfg, const std::string& out_dir,
                const std::string& subcommand) {
  exex::write_text_file(join_out(out_dir, "run_meta.json"),
                        exex::run_meta_json(cfg, subcommand));
}

std::vector<exex::CrystalConfiguration> read_structures_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open structures file '" + path + "'");
  }
  std::vector<exex::CrystalConfiguration> frames = exex::read_extended_xyz_frames(in);
  if (frames.empty()) {
    throw ConfigError("structures file '" + path + "' contains no frames");
  }
  return frames;
}

// ---------------------------------------------------------------------------
// expand: grow the candidate set (phase one, then phase two unless
// suppressed) and emit the set plus traces.
// ---------------------------------------------------------------------------
int run_expand(const CliConfig& cfg, const std::string& out_dir,
               bool non_adaptive_only) {
  const exex::ProblemKind kind = cfg.kind();
  exex::RunConfig rc = cfg.to_run_config();
  exex::RngStream root(rc.rng_seed, "expand");

  exex::CandidateSet set(rc.p);
  std::unique_ptr<exex::Perturber> perturber;
  std::unique_ptr<exex::EnergyOracle> oracle;
  if (kind == exex::ProblemKind::lj_crystal) {
    exex::RngStream init_rng = root.substream("initial-structures");
    const int n0 = cfg.n0 > 0 ? cfg.n0 : 30;
    for (int i = 0; i < n0; ++i) {
      const exex::CrystalConfiguration c =
          exex::random_structure(cfg.v_ref, cfg.n_atoms, cfg.min_sep,
                                 cfg.vol_jitter, init_rng, 10000, cfg.species);
      set.add(exex::agni_fingerprint(c, cfg.agni), c);
    }
    perturber = std::make_unique<exex::CrystalPerturber>(cfg.max_disp, cfg.agni,
                                                         cfg.perturb_floor);
    oracle = std::make_unique<exex::LjOracle>(cfg.lj);
  } else {
    exex::RngStream design_rng = root.substream("initial-design");
    const exex::Box box = exex::problem_start_box(kind, rc.p);
    const Eigen::MatrixXd init =
        exex::maximin_lhd(rc.resolved_n0(), box, cfg.lhd_restarts, design_rng);
    for (Eigen::Index i = 0; i < init.rows(); ++i) {
      set.add(init.row(i).transpose());
    }
    perturber = std::make_unique<exex::MvnPerturber>(
        exex::MvnPerturber::from_initial_set(set));
    oracle = std::make_unique<exex::FunctionOracle>(exex::problem_function(kind));
  }

  exex::ExpansionEngine engine(set, *perturber, rc);
  exex::EnergyLedger ledger;
  exex::RngStream expand_rng = root.substream("expansion");
  exex::RngStream adapt_rng = root.substream("adaptive");

  int code = 0;
  std::string outcome = "completed";
  try {
    engine.run_nonadaptive(rc.resolved_n1(), expand_rng);
    if (!non_adaptive_only) {
      const exex::AdaptiveReport rep = engine.run_adaptive(*oracle, ledger, adapt_rng);
      outcome = exex::adaptive_stop_name(rep.stop);
      if (rep.stop == exex::AdaptiveStopReason::cap) code = 2;
    }
  } catch (const exex::NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    outcome = "non-convergence";
    code = 2;
  }

  exex::write_candidates_csv(join_out(out_dir, "candidates.csv"), set.as_matrix());
  exex::write_expansion_trace_csv(join_out(out_dir, "expansion_trace.csv"),
                                  engine.trace(), !non_adaptive_only);
  exex::write_ledger_csv(join_out(out_dir, "ledger.csv"), ledger);
  if (engine.estimates().size() == set.size() && set.size() > 0) {
    Eigen::MatrixXd components;
    if (engine.projection() != nullptr) {
      components = engine.projection()->project_rows(set.as_matrix());
    } else {
      components = set.as_matrix();
      components.rowwise() -= components.colwise().mean();
      if (components.cols() > 3) components = components.leftCols(3);
    }
    exex::write_pca_csv(join_out(out_dir, "pca_projection.csv"), components,
                        engine.estimates());
  }

  if (cfg.verbosity > 0) {
    std::cout << "expand: " << set.size() << " candidates, " << ledger.size()
              << " oracle calls, outcome " << outcome << "\n";
  }
  return code;
}

// ---------------------------------------------------------------------------
// optimize: surrogate-guided minimization over a finalized candidate file.
// ---------------------------------------------------------------------------
int run_optimize(const CliConfig& cfg, const std::string& out_dir,
                 const std::string& candidates_path) {
  const exex::ProblemKind kind = cfg.kind();
  exex::RunConfig rc = cfg.to_run_config();

  std::unique_ptr<exex::CandidateSet> set;
  std::unique_ptr<exex::EnergyOracle> oracle;
  if (kind == exex::ProblemKind::lj_crystal) {
    const auto frames = read_structures_file(candidates_path);
    set = std::make_unique<exex::CandidateSet>(cfg.agni.dim());
    for (const exex::CrystalConfiguration& c : frames) {
      set->add(exex::agni_fingerprint(c, cfg.agni), c);
    }
    oracle = std::make_unique<exex::LjOracle>(cfg.lj);
  } else {
    const Eigen::MatrixXd pts = exex::read_candidates_csv(candidates_path);
    if (pts.rows() == 0) {
      throw ConfigError("candidate file '" + candidates_path + "' has no rows");
    }
    if (pts.cols() != cfg.p) {
      throw ConfigError("candidate file '" + candidates_path + "' has " +
                        std::to_string(pts.cols()) + " coordinates but p is " +
                        std::to_string(cfg.p));
    }
    set = std::make_unique<exex::CandidateSet>(static_cast<int>(pts.cols()));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      set->add(pts.row(i).transpose());
    }
    oracle = std::make_unique<exex::FunctionOracle>(exex::problem_function(kind));
  }

  exex::RngStream root(rc.rng_seed, "optimize");
  exex::RngStream bo_rng = root.substream("bo");
  exex::EnergyLedger ledger;
  exex::BoResult bo;
  try {
    bo = exex::bo_run(*set, *oracle, ledger, rc, bo_rng);
  } catch (...) {
    // Preserve the evaluation record alongside run_meta before failing.
    exex::write_ledger_csv(join_out(out_dir, "ledger.csv"), ledger);
    throw;
  }

  exex::write_bo_trace_csv(join_out(out_dir, "bo_trace.csv"), bo.trace);
  exex::write_ledger_csv(join_out(out_dir, "ledger.csv"), ledger);

  ordered_json best;
  best["id"] = bo.best_index + 1;
  best["energy"] = bo.best_energy;
  best["stop"] = exex::bo_stop_name(bo.stop);
  best["iterations"] = bo.iterations;
  best["design_calls"] = bo.design_calls;
  best["oracle_calls"] = ledger.size();
  ordered_json coords = ordered_json::array();
  const exex::Fingerprint& fp = set->point(bo.best_index);
  for (Eigen::Index k = 0; k < fp.size(); ++k) coords.push_back(fp[k]);
  best["coordinates"] = std::move(coords);
  exex::write_text_file(join_out(out_dir, "best_point.json"), best.dump(2) + "\n");

  if (kind == exex::ProblemKind::lj_crystal) {
    const exex::CrystalConfiguration* c = set->config(bo.best_index);
    if (c != nullptr) {
      exex::write_text_file(join_out(out_dir, "best_structure.xyz"),
                            exex::to_extended_xyz(*c));
    }
  }

  if (cfg.verbosity > 0) {
    std::cout << "optimize: best id " << bo.best_index + 1 << " energy "
              << exex::fmt_g12(bo.best_energy) << " after " << ledger.size()
              << " oracle calls (" << exex::bo_stop_name(bo.stop) << ")\n";
  }
  return bo.stop == exex::BoStopReason::cap ? 2 : 0;
}

// ---------------------------------------------------------------------------
// bench: seeded replications of one benchmark cell.
// ---------------------------------------------------------------------------
int run_bench(const CliConfig& cfg, const std::string& out_dir) {
  const exex::BenchmarkResult result = exex::run_benchmark(cfg.to_benchmark_spec());
  exex::write_bench_csv(join_out(out_dir, "bench_result.csv"), result.to_rows());
  exex::write_text_file(join_out(out_dir, "bench_summary.json"),
                        result.summary_json());
  if (cfg.verbosity > 0) {
    std::cout << "bench: " << exex::problem_name(result.spec.problem)
              << " p=" << result.spec.p << " N1=" << result.spec.resolved_n1()
              << " completion " << result.completion_fraction
              << " median adaptive " << exex::fmt_g12(result.median_adaptive)
              << " vs baseline " << exex::fmt_g12(result.median_baseline) << "\n";
  }
  return result.completion_fraction >= 0.9 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// fingerprint: descriptor vectors for structures in an extended-XYZ file.
// ---------------------------------------------------------------------------
int run_fingerprint(const CliConfig& cfg, const std::string& out_dir,
                    const std::string& structures_path) {
  const auto frames = read_structures_file(structures_path);
  Eigen::MatrixXd fps(static_cast<Eigen::Index>(frames.size()), cfg.agni.dim());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    fps.row(static_cast<Eigen::Index>(i)) =
        exex::agni_fingerprint(frames[i], cfg.agni).transpose();
  }
  exex::write_fingerprints_csv(join_out(out_dir, "fingerprints.csv"), fps);
  if (cfg.verbosity > 0) {
    std::cout << "fingerprint: " << frames.size() << " structures, "
              << cfg.agni.dim() << " components each\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// demo: the full pipeline on the periodic pair-potential problem.
// ---------------------------------------------------------------------------
int run_demo(const CliConfig& cfg, const std::string& out_dir) {
  exex::CrystalDemoConfig demo = cfg.to_demo_config();
  const exex::CrystalDemoReport report = exex::run_crystal_demo(demo, out_dir);
  if (cfg.verbosity > 0) {
    std::cout << "demo: " << report.final_size << " candidates, best energy "
              << exex::fmt_g12(report.best_energy) << " (id "
              << report.best_index + 1 << "), " << report.ledger_total
              << " oracle calls, budget identity "
              << (report.budget_ok ? "ok" : "VIOLATED") << "\n";
  }
  const bool capped = report.adaptive_stop == std::string("cap") ||
                      report.bo_stop == std::string("cap");
  return capped ? 2 : 0;
}

std::string help_footer() {
  std::string text =
      "Artifact schemas (CSV headers):\n"
      "  candidates.csv       id,x1..xp\n"
      "  fingerprints.csv     id,S1..Sm,V1..Vm\n"
      "  expansion_trace.csv  attempt,accepted,t_before,d_min,set_size,phase"
      "[,min_est_idx,oracle_calls]\n"
      "  ledger.csv           ordinal,phase,fingerprint_id,energy,best_so_far\n"
      "  bo_trace.csv         iter,chosen_id,max_ei,rel_ei,oracle_energy,best_so_far\n"
      "  bench_result.csv     problem,p,N1,replication,stage,min_value,oracle_calls\n"
      "  pca_projection.csv   id,pc1,pc2,pc3,energy_estimate\n"
      "  nn_curve.csv         size,median_nn,median_nn_random\n"
      "\nExit codes: 0 success, 1 usage/config error, 2 non-convergence.\n"
      "\nConfig defaults (all keys optional, unknown keys rejected):\n";
  text += exex::run_meta_json(CliConfig{}, "(defaults)");
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "exex: expansion, exploration, and surrogate optimization over an "
      "unknown feature space"};
  app.require_subcommand(1);
  app.footer(help_footer());

  std::string config_path;
  std::string out_dir = "exex_out";
  std::string candidates_path;
  std::string structures_path;
  std::uint64_t seed_override = 0;
  int threads_override = 0;
  bool non_adaptive_only = false;

  const auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path,
                                "JSON run configuration file");
    opt->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "output directory (created if missing)")
        ->capture_default_str();
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--threads", threads_override,
                    "override the config thread count (0 = logical cores)");
  };

  CLI::App* expand = app.add_subcommand(
      "expand", "Grow the candidate set by perturbation (both phases)");
  add_common(expand, true);
  expand->add_flag("--non-adaptive-only", non_adaptive_only,
                   "stop after the oracle-free phase");

  CLI::App* optimize = app.add_subcommand(
      "optimize", "Surrogate-guided minimization over a candidate file");
  add_common(optimize, true);
  optimize
      ->add_option("--candidates", candidates_path,
                   "candidate CSV (vector problems) or extended-XYZ frames "
                   "(crystal problem)")
      ->check(CLI::ExistingFile)
      ->required();

  CLI::App* bench = app.add_subcommand(
      "bench", "Seeded replications of one benchmark cell");
  add_common(bench, true);

  CLI::App* fingerprint = app.add_subcommand(
      "fingerprint", "Descriptor vectors for extended-XYZ structures");
  add_common(fingerprint, false);
  fingerprint
      ->add_option("--structures", structures_path, "extended-XYZ frames file")
      ->check(CLI::ExistingFile)
      ->required();

  CLI::App* demo = app.add_subcommand(
      "demo", "Full pipeline on the periodic pair-potential problem");
  add_common(demo, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    CliConfig cfg;
    if (!config_path.empty()) {
      cfg = exex::load_cli_config(config_path);
    }
    if (sub->count("--seed") > 0) cfg.seed = seed_override;
    if (sub->count("--threads") > 0) cfg.threads = threads_override;

    ensure_out_dir(out_dir);
    write_meta(cfg, out_dir, sub->get_name());

    if (sub == expand) return run_expand(cfg, out_dir, non_adaptive_only);
    if (sub == optimize) return run_optimize(cfg, out_dir, candidates_path);
    if (sub == bench) return run_bench(cfg, out_dir);
    if (sub == fingerprint) return run_fingerprint(cfg, out_dir, structures_path);
    if (sub == demo) return run_demo(cfg, out_dir);
    std::cerr << "unknown subcommand\n";
    return 1;
  } catch (const exex::NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
