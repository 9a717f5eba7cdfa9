#pragma once

#include <optional>
#include <vector>

#include "exex/csvio.hpp"
#include "exex/surrogate.hpp"
#include "exex/types.hpp"

namespace exex {

/// Expected improvement of a Gaussian posterior (mean, sd) over the current
/// best energy e_min: (e_min - mean) Phi(z) + sd phi(z) with
/// z = (e_min - mean)/sd; the sd = 0 limit is max(0, e_min - mean).
double expected_improvement(double mean, double sd, double e_min);

struct ArgmaxEiResult {
  int index = -1;     ///< argmax entry (ties to lowest index)
  double max_ei = 0;  ///< its expected improvement
  /// Every candidate scored exactly zero; index is then the lowest
  /// unevaluated entry.
  bool all_zero = false;
};

/// Scan every candidate (already-evaluated entries included; their EI is
/// naturally near zero) and return the expected-improvement argmax.
/// `evaluated` holds the set indices already measured. Requires at least
/// one unevaluated entry.
ArgmaxEiResult argmax_ei(const GpModel& model, const CandidateSet& set,
                         const std::vector<int>& evaluated, double e_min,
                         int threads = 1);

enum class BoStopReason {
  converged,  ///< relative expected improvement fell to the threshold
  duplicate,  ///< the argmax repeated an already-evaluated entry
  cap,        ///< iteration count reached the candidate-set size
};
const char* bo_stop_name(BoStopReason reason);

struct BoResult {
  int best_index = -1;  ///< 0-based set index of the measured minimum
  double best_energy = 0;
  BoStopReason stop = BoStopReason::converged;
  long long iterations = 0;   ///< oracle evaluations spent by the loop
  long long design_calls = 0; ///< oracle evaluations spent on a fresh design
  std::vector<BoTraceRow> trace;
  std::vector<int> evaluated;     ///< all evaluated set indices, in order
  std::vector<double> energies;   ///< matching measured energies
};

/// Discrete Bayesian-optimization loop over a finalized candidate set.
///
/// When seed_indices/seed_energies are given (the adaptive phase's oracle
/// record) the surrogate starts from them, optionally reusing seed_model
/// without an immediate refit. Otherwise the loop spends its own initial
/// design: the lowest-index entry plus space-filling augmentation up to
/// 10 p members, recorded in the ledger under the initial phase tag.
///
/// Each iteration scans EI across the whole set, stops BEFORE evaluating
/// when max EI / max(|e_min|, 1e-12) <= t_ei_factor or when the argmax was
/// already measured, and otherwise evaluates the oracle there (ledger
/// phase tag "bo") and refits.
BoResult bo_run(const CandidateSet& set, EnergyOracle& oracle, EnergyLedger& ledger,
                const RunConfig& config, RngStream& rng,
                const std::vector<int>* seed_indices = nullptr,
                const std::vector<double>* seed_energies = nullptr,
                const GpModel* seed_model = nullptr);

}  // namespace exex
