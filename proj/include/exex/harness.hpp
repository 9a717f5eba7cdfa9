#pragma once

#include <string>
#include <vector>

#include "exex/acquisition.hpp"
#include "exex/agni.hpp"
#include "exex/csvio.hpp"
#include "exex/expansion.hpp"
#include "exex/problems.hpp"
#include "exex/types.hpp"

namespace exex {

/// Median of a non-empty sample (average of the middle pair for even n).
double median_of(std::vector<double> values);

// ---------------------------------------------------------------------------
// Benchmark study: one (problem, p, N1) cell over seeded replications.
// ---------------------------------------------------------------------------

struct BenchmarkSpec {
  ProblemKind problem = ProblemKind::sphere;
  int p = 2;
  long n1 = 0;  ///< non-adaptive budget; 0 resolves to 100 p
  int replications = 30;
  /// Restarts for both the initial and the baseline space-filling designs.
  int lhd_restarts = 10;
  RunConfig run;  ///< seed, surrogate options, cadence, caps

  long resolved_n1() const { return n1 > 0 ? n1 : 100L * p; }
};

struct ReplicationOutcome {
  int replication = 0;  ///< 1-based
  bool ok = false;
  std::string error;
  std::string adaptive_stop;
  double min_initial = 0;   ///< true-function minimum over the 10p design
  double min_expanded = 0;  ///< ... over the size-N1 set
  double min_adaptive = 0;  ///< ... over the final set
  double min_baseline = 0;  ///< ... over the matched-size baseline design
  long long final_size = 0;
  long long oracle_design = 0;
  long long oracle_adaptive = 0;
};

struct BenchmarkResult {
  BenchmarkSpec spec;
  std::vector<ReplicationOutcome> reps;
  double completion_fraction = 0;
  double median_initial = 0;
  double median_expanded = 0;
  double median_adaptive = 0;
  double median_baseline = 0;

  std::vector<BenchRow> to_rows() const;
  std::string summary_json() const;
};

/// Run every replication of one benchmark cell: a 10p-point space-filling
/// initial set in the problem's start box, both expansion phases with the
/// true function as the metered oracle, then a matched-size baseline
/// design. Stage minima are true-function values over set members and are
/// never charged to the oracle ledger. Per-replication failures are
/// recorded and the run continues.
BenchmarkResult run_benchmark(const BenchmarkSpec& spec);

// ---------------------------------------------------------------------------
// Crystal demo: the full pipeline on a periodic Lennard-Jones problem.
// ---------------------------------------------------------------------------

struct CrystalDemoConfig {
  int n0 = 30;      ///< initial random structures
  long n1 = 800;    ///< non-adaptive budget
  int n_atoms = 8;
  double v_ref = 16.6;      ///< per-atom reference volume (cubic Angstrom)
  double min_sep = 2.0;     ///< placement separation (Angstrom)
  double vol_jitter = 0.05;
  /// Perturbation ball radius (Angstrom). Large enough that accepted moves
  /// out-space fresh random draws in fingerprint distance; smaller values
  /// keep the walk inside tight clusters around the seeds.
  double max_disp = 1.0;
  /// Proposals with a pair distance below this are redrawn, keeping every
  /// set member inside the oracle's physical domain.
  double perturb_floor = 0.5;
  std::string species = "Al";
  LjParams lj;
  AgniParams agni;
  RunConfig run;
};

struct NnCurvePoint {
  long size = 0;
  double median_ours = 0;
  double median_random = 0;
};

struct CrystalDemoReport {
  int p = 0;
  long long n0 = 0;
  long long additions = 0;   ///< adaptive-phase accepted additions (n2)
  long long bo_iterations = 0;  ///< acquisition-driven evaluations (n3)
  long long ledger_total = 0;
  long long expected_calls = 0;  ///< 10p + floor(n2/10) + n3
  bool budget_ok = false;
  std::string adaptive_stop;
  std::string bo_stop;
  int best_index = -1;  ///< 0-based set index of the measured minimum
  double best_energy = 0;
  double min_initial_energy = 0;  ///< lowest energy among the n0 initials
  long long final_size = 0;
  std::vector<NnCurvePoint> curve;

  std::string summary_json() const;
};

/// Full pipeline on random periodic structures with the pair-potential
/// oracle. When out_dir is non-empty, writes candidates/fingerprint CSVs,
/// expansion and acquisition traces, the ledger, the component projection,
/// the nearest-neighbor-distance curve, the best structure (extended XYZ),
/// and a summary JSON into that directory.
CrystalDemoReport run_crystal_demo(const CrystalDemoConfig& config,
                                   const std::string& out_dir);

}  // namespace exex
