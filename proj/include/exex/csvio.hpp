#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "exex/format.hpp"
#include "exex/types.hpp"

namespace exex {

// ---------------------------------------------------------------------------
// Row records shared by the engines and the CSV writers.
// ---------------------------------------------------------------------------

/// One attempted addition during set expansion (either phase).
struct ExpansionTraceRow {
  long long attempt = 0;  ///< 1-based attempt ordinal within the phase
  bool accepted = false;
  double t_before = 0;  ///< acceptance threshold before the update
  double d_min = 0;     ///< nearest-neighbor distance of the proposal
  long long set_size = 0;  ///< set size after this attempt
  Phase phase = Phase::initial;
  long long min_est_idx = -1;   ///< adaptive phase: current estimated-minimum index
  long long oracle_calls = -1;  ///< adaptive phase: cumulative oracle evaluations
};

/// One iteration of the expected-improvement optimization loop.
struct BoTraceRow {
  long long iter = 0;       ///< 1-based iteration ordinal
  long long chosen_id = 0;  ///< 1-based id of the selected candidate
  double max_ei = 0;
  double rel_ei = 0;
  double oracle_energy = 0;
  double best_so_far = 0;
};

/// One benchmark measurement (one replication at one pipeline stage).
struct BenchRow {
  std::string problem;
  int p = 0;
  int n1 = 0;
  int replication = 0;  ///< 1-based
  std::string stage;    ///< e.g. "initial", "expanded", "optimized", "baseline"
  double min_value = 0;
  long long oracle_calls = 0;
};

// ---------------------------------------------------------------------------
// Writers. All throw std::runtime_error (naming the path) on I/O failure.
// Every floating-point cell is rendered with fmt_g12.
// ---------------------------------------------------------------------------

/// Columns: id,x1..xp with ids 1..n (row order).
void write_candidates_csv(const std::string& path, const Eigen::MatrixXd& points);

/// Reads a file produced by write_candidates_csv. Validates the header and
/// the id column; returns the coordinate block.
Eigen::MatrixXd read_candidates_csv(const std::string& path);

/// Columns: ordinal,phase,fingerprint_id,energy,best_so_far.
void write_ledger_csv(const std::string& path, const EnergyLedger& ledger);

/// Columns: attempt,accepted,t_before,d_min,set_size,phase and, when
/// adaptive_columns is set, min_est_idx,oracle_calls (blank when unknown).
void write_expansion_trace_csv(const std::string& path,
                               const std::vector<ExpansionTraceRow>& rows,
                               bool adaptive_columns);

/// Columns: iter,chosen_id,max_ei,rel_ei,oracle_energy,best_so_far.
void write_bo_trace_csv(const std::string& path, const std::vector<BoTraceRow>& rows);

/// Columns: problem,p,N1,replication,stage,min_value,oracle_calls.
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

/// Columns: id,pc1,pc2,pc3,energy_estimate. Missing trailing components
/// (projection rank < 3) are written as 0.
void write_pca_csv(const std::string& path, const Eigen::MatrixXd& components,
                   const Eigen::VectorXd& energy_estimates);

/// Columns: id,S1..Sm,V1..Vm where the row length is 2m.
void write_fingerprints_csv(const std::string& path, const Eigen::MatrixXd& fingerprints);

// ---------------------------------------------------------------------------
// Small file helpers shared by the CLI.
// ---------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace exex
