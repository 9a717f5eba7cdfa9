#include "exex/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "exex/crystal.hpp"
#include "exex/designs.hpp"

namespace exex {

using ordered_json = nlohmann::ordered_json;

double median_of(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("median_of: empty sample");
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  if (n % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

// ---------------------------------------------------------------------------
// Benchmark study
// ---------------------------------------------------------------------------

namespace {

ReplicationOutcome run_one_replication(const BenchmarkSpec& spec, int rep) {
  ReplicationOutcome out;
  out.replication = rep;

  const int p = spec.p;
  const long n1 = spec.resolved_n1();
  const Box box = problem_start_box(spec.problem, p);

  RngStream rep_rng(spec.run.rng_seed, "bench-rep-" + std::to_string(rep));
  RngStream design_rng = rep_rng.substream("initial-design");
  RngStream expand_rng = rep_rng.substream("expansion");
  RngStream adapt_rng = rep_rng.substream("adaptive");
  RngStream baseline_rng = rep_rng.substream("baseline");

  const int n_init = 10 * p;
  const Eigen::MatrixXd init = maximin_lhd(n_init, box, spec.lhd_restarts, design_rng);
  CandidateSet set(p);
  for (Eigen::Index i = 0; i < init.rows(); ++i) {
    set.add(init.row(i).transpose());
  }

  MvnPerturber perturber = MvnPerturber::from_initial_set(set);
  RunConfig rc = spec.run;
  rc.p = p;
  rc.n1_budget = n1;

  ExpansionEngine engine(set, perturber, rc);
  engine.run_nonadaptive(n1, expand_rng);

  FunctionOracle oracle(problem_function(spec.problem));
  EnergyLedger ledger;
  const AdaptiveReport arep = engine.run_adaptive(oracle, ledger, adapt_rng);
  out.adaptive_stop = adaptive_stop_name(arep.stop);
  out.oracle_design = ledger.count(Phase::initial);
  out.oracle_adaptive = ledger.count(Phase::adaptive);
  out.final_size = set.size();

  // Stage minima are reporting sweeps of the true function over set members;
  // they are never charged to the oracle ledger. The set is append-only, so
  // each stage is a prefix of the final entry order.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double min_initial = kInf;
  double min_expanded = kInf;
  double min_adaptive = kInf;
  for (int i = 0; i < set.size(); ++i) {
    const double v = oracle.raw(set.point(i));
    min_adaptive = std::min(min_adaptive, v);
    if (i < n_init) min_initial = std::min(min_initial, v);
    if (i < n1) min_expanded = std::min(min_expanded, v);
  }
  out.min_initial = min_initial;
  out.min_expanded = min_expanded;
  out.min_adaptive = min_adaptive;

  // Matched-size baseline design in the same start box, from an independent
  // sub-stream.
  const Eigen::MatrixXd baseline =
      maximin_lhd(set.size(), box, spec.lhd_restarts, baseline_rng);
  double min_baseline = kInf;
  for (Eigen::Index i = 0; i < baseline.rows(); ++i) {
    min_baseline = std::min(min_baseline, oracle.raw(baseline.row(i).transpose()));
  }
  out.min_baseline = min_baseline;
  out.ok = true;
  return out;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkSpec& spec) {
  if (spec.p < 1) throw std::invalid_argument("run_benchmark: p must be >= 1");
  if (spec.replications < 1) {
    throw std::invalid_argument("run_benchmark: replications must be >= 1");
  }
  if (spec.problem == ProblemKind::lj_crystal) {
    throw std::invalid_argument(
        "run_benchmark: benchmark cells use vector test problems");
  }

  BenchmarkResult result;
  result.spec = spec;
  result.reps.reserve(static_cast<std::size_t>(spec.replications));
  for (int rep = 1; rep <= spec.replications; ++rep) {
    try {
      result.reps.push_back(run_one_replication(spec, rep));
    } catch (const std::exception& e) {
      ReplicationOutcome failed;
      failed.replication = rep;
      failed.ok = false;
      failed.error = e.what();
      result.reps.push_back(std::move(failed));
    }
  }

  std::vector<double> initial, expanded, adaptive, baseline;
  for (const ReplicationOutcome& r : result.reps) {
    if (!r.ok) continue;
    initial.push_back(r.min_initial);
    expanded.push_back(r.min_expanded);
    adaptive.push_back(r.min_adaptive);
    baseline.push_back(r.min_baseline);
  }
  result.completion_fraction =
      static_cast<double>(initial.size()) / static_cast<double>(spec.replications);
  if (!initial.empty()) {
    result.median_initial = median_of(initial);
    result.median_expanded = median_of(expanded);
    result.median_adaptive = median_of(adaptive);
    result.median_baseline = median_of(baseline);
  }
  return result;
}

std::vector<BenchRow> BenchmarkResult::to_rows() const {
  std::vector<BenchRow> rows;
  const std::string name = problem_name(spec.problem);
  const int n1 = static_cast<int>(spec.resolved_n1());
  for (const ReplicationOutcome& r : reps) {
    if (!r.ok) continue;
    const long long pipeline_calls = r.oracle_design + r.oracle_adaptive;
    const auto push = [&](const char* stage, double value, long long calls) {
      BenchRow row;
      row.problem = name;
      row.p = spec.p;
      row.n1 = n1;
      row.replication = r.replication;
      row.stage = stage;
      row.min_value = value;
      row.oracle_calls = calls;
      rows.push_back(std::move(row));
    };
    push("initial", r.min_initial, 0);
    push("expanded", r.min_expanded, 0);
    push("adaptive", r.min_adaptive, pipeline_calls);
    push("baseline", r.min_baseline, 0);
  }
  return rows;
}

std::string BenchmarkResult::summary_json() const {
  ordered_json j;
  j["problem"] = problem_name(spec.problem);
  j["p"] = spec.p;
  j["n1"] = spec.resolved_n1();
  j["replications"] = spec.replications;
  int completed = 0;
  for (const ReplicationOutcome& r : reps) completed += r.ok ? 1 : 0;
  j["completed"] = completed;
  j["completion_fraction"] = completion_fraction;
  j["medians"] = {
      {"initial", median_initial},
      {"expanded", median_expanded},
      {"adaptive", median_adaptive},
      {"baseline", median_baseline},
  };
  j["adaptive_beats_baseline"] = median_adaptive < median_baseline;
  ordered_json reps_json = ordered_json::array();
  for (const ReplicationOutcome& r : reps) {
    ordered_json rj;
    rj["replication"] = r.replication;
    rj["ok"] = r.ok;
    if (!r.ok) {
      rj["error"] = r.error;
    } else {
      rj["adaptive_stop"] = r.adaptive_stop;
      rj["min_initial"] = r.min_initial;
      rj["min_expanded"] = r.min_expanded;
      rj["min_adaptive"] = r.min_adaptive;
      rj["min_baseline"] = r.min_baseline;
      rj["final_size"] = r.final_size;
      rj["oracle_design"] = r.oracle_design;
      rj["oracle_adaptive"] = r.oracle_adaptive;
    }
    reps_json.push_back(std::move(rj));
  }
  j["replication_results"] = std::move(reps_json);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Crystal demo
// ---------------------------------------------------------------------------

namespace {

/// Replay points in insertion order and report, at each checkpoint size,
/// the median over current members of the distance to the nearest other
/// member.
std::vector<double> nn_medians_at(const Eigen::MatrixXd& pts,
                                  const std::vector<long>& checkpoints) {
  const Eigen::Index n = pts.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> nn(static_cast<std::size_t>(n), kInf);
  std::vector<double> medians;
  medians.reserve(checkpoints.size());
  std::size_t next = 0;
  for (Eigen::Index i = 0; i < n && next < checkpoints.size(); ++i) {
    double own = kInf;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = (pts.row(i) - pts.row(j)).norm();
      own = std::min(own, d);
      nn[static_cast<std::size_t>(j)] = std::min(nn[static_cast<std::size_t>(j)], d);
    }
    nn[static_cast<std::size_t>(i)] = own;
    while (next < checkpoints.size() && i + 1 == checkpoints[next]) {
      std::vector<double> sample(nn.begin(), nn.begin() + (i + 1));
      medians.push_back(median_of(std::move(sample)));
      ++next;
    }
  }
  if (next != checkpoints.size()) {
    throw std::logic_error("nn_medians_at: checkpoint beyond final size");
  }
  return medians;
}

std::vector<long> curve_checkpoints(long n0, long final_size) {
  std::vector<long> cps;
  for (long s = 50; s < final_size; s += 50) {
    if (s >= n0) cps.push_back(s);
  }
  cps.push_back(final_size);
  return cps;
}

}  // namespace

std::string CrystalDemoReport::summary_json() const {
  ordered_json j;
  j["p"] = p;
  j["n0"] = n0;
  j["n1_additions"] = final_size - n0 - additions;  // non-adaptive growth
  j["n2_additions"] = additions;
  j["n3_iterations"] = bo_iterations;
  j["final_size"] = final_size;
  j["ledger_total"] = ledger_total;
  j["expected_oracle_calls"] = expected_calls;
  j["budget_identity_ok"] = budget_ok;
  j["adaptive_stop"] = adaptive_stop;
  j["bo_stop"] = bo_stop;
  j["best_id"] = best_index + 1;
  j["best_energy"] = best_energy;
  j["min_initial_energy"] = min_initial_energy;
  j["best_at_or_below_initials"] = best_energy <= min_initial_energy;
  ordered_json curve_json = ordered_json::array();
  for (const NnCurvePoint& c : curve) {
    curve_json.push_back({{"size", c.size},
                          {"median_nn", c.median_ours},
                          {"median_nn_random", c.median_random}});
  }
  j["nn_curve"] = std::move(curve_json);
  return j.dump(2) + "\n";
}

CrystalDemoReport run_crystal_demo(const CrystalDemoConfig& config,
                                   const std::string& out_dir) {
  if (config.n0 < 2) {
    throw std::invalid_argument("run_crystal_demo: n0 must be >= 2");
  }
  if (config.n1 <= config.n0) {
    throw std::invalid_argument("run_crystal_demo: n1 must exceed n0");
  }
  if (config.n_atoms < 1) {
    throw std::invalid_argument("run_crystal_demo: n_atoms must be >= 1");
  }

  const int p = config.agni.dim();
  RunConfig rc = config.run;
  rc.p = p;
  rc.n1_budget = config.n1;
  rc.n0 = config.n0;

  RngStream root(rc.rng_seed, "crystal-demo");
  RngStream init_rng = root.substream("initial-structures");
  RngStream expand_rng = root.substream("expansion");
  RngStream adapt_rng = root.substream("adaptive");
  RngStream bo_rng = root.substream("optimize");
  RngStream baseline_rng = root.substream("random-baseline");

  CandidateSet set(p);
  std::vector<CrystalConfiguration> initials;
  initials.reserve(static_cast<std::size_t>(config.n0));
  for (int i = 0; i < config.n0; ++i) {
    CrystalConfiguration cfg =
        random_structure(config.v_ref, config.n_atoms, config.min_sep,
                         config.vol_jitter, init_rng, 10000, config.species);
    set.add(agni_fingerprint(cfg, config.agni), cfg);
    initials.push_back(std::move(cfg));
  }

  CrystalPerturber perturber(config.max_disp, config.agni, config.perturb_floor);
  ExpansionEngine engine(set, perturber, rc);
  engine.run_nonadaptive(config.n1, expand_rng);

  LjOracle oracle(config.lj);
  EnergyLedger ledger;
  const AdaptiveReport arep = engine.run_adaptive(oracle, ledger, adapt_rng);

  const BoResult bo =
      bo_run(set, oracle, ledger, rc, bo_rng, &engine.train_indices(),
             &engine.train_energies(), engine.model());

  CrystalDemoReport report;
  report.p = p;
  report.n0 = config.n0;
  report.additions = arep.additions;
  report.bo_iterations = bo.iterations;
  report.final_size = set.size();
  report.ledger_total = ledger.size();
  report.expected_calls = static_cast<long long>(arep.design.size()) +
                          arep.additions / rc.dft_cadence + bo.design_calls +
                          bo.iterations;
  report.budget_ok =
      report.ledger_total == report.expected_calls &&
      ledger.count(Phase::initial) ==
          static_cast<long>(arep.design.size()) + bo.design_calls &&
      ledger.count(Phase::adaptive) == arep.additions / rc.dft_cadence &&
      ledger.count(Phase::bo) == bo.iterations;
  report.adaptive_stop = adaptive_stop_name(arep.stop);
  report.bo_stop = bo_stop_name(bo.stop);
  report.best_index = bo.best_index;
  report.best_energy = bo.best_energy;

  double min_initial = std::numeric_limits<double>::infinity();
  for (const CrystalConfiguration& cfg : initials) {
    min_initial = std::min(min_initial, lj_energy(cfg, config.lj));
  }
  report.min_initial_energy = min_initial;

  // Sparsity curve: our expansion order against a same-size sequence of
  // fresh random structures.
  const Eigen::MatrixXd pts = set.as_matrix();
  const std::vector<long> checkpoints = curve_checkpoints(config.n0, set.size());
  const std::vector<double> ours = nn_medians_at(pts, checkpoints);
  Eigen::MatrixXd random_pts(set.size(), p);
  for (int i = 0; i < set.size(); ++i) {
    const CrystalConfiguration cfg =
        random_structure(config.v_ref, config.n_atoms, config.min_sep,
                         config.vol_jitter, baseline_rng, 10000, config.species);
    random_pts.row(i) = agni_fingerprint(cfg, config.agni).transpose();
  }
  const std::vector<double> random_medians = nn_medians_at(random_pts, checkpoints);
  report.curve.reserve(checkpoints.size());
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    report.curve.push_back({checkpoints[i], ours[i], random_medians[i]});
  }

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto at = [&](const char* name) {
      return (fs::path(out_dir) / name).string();
    };
    write_candidates_csv(at("candidates.csv"), pts);
    write_fingerprints_csv(at("fingerprints.csv"), pts);
    write_ledger_csv(at("ledger.csv"), ledger);
    write_expansion_trace_csv(at("expansion_trace.csv"), engine.trace(), true);
    write_bo_trace_csv(at("bo_trace.csv"), bo.trace);
    if (engine.projection() != nullptr && engine.estimates().size() == set.size()) {
      write_pca_csv(at("pca_projection.csv"),
                    engine.projection()->project_rows(pts), engine.estimates());
    }
    std::string curve_csv = "size,median_nn,median_nn_random\n";
    for (const NnCurvePoint& c : report.curve) {
      curve_csv += std::to_string(c.size) + "," + fmt_g12(c.median_ours) + "," +
                   fmt_g12(c.median_random) + "\n";
    }
    write_text_file(at("nn_curve.csv"), curve_csv);
    const CrystalConfiguration* best_cfg = set.config(bo.best_index);
    if (best_cfg == nullptr) {
      throw std::logic_error("run_crystal_demo: best entry has no structure");
    }
    write_text_file(at("best_structure.xyz"), to_extended_xyz(*best_cfg));
    write_text_file(at("summary.json"), report.summary_json());
  }
  return report;
}

}  // namespace exex
