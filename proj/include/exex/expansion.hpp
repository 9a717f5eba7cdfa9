#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "exex/csvio.hpp"
#include "exex/setgeom.hpp"
#include "exex/surrogate.hpp"
#include "exex/types.hpp"

namespace exex {

/// Starting acceptance threshold: the mean nearest-neighbor distance over
/// the set. Requires at least two entries.
double initial_threshold(const CandidateSet& set);

/// Threshold relaxation applied after every perturbation attempt, accepted
/// or not: the midpoint of the current threshold and the attempt's
/// nearest-neighbor distance.
double threshold_update(double t, double d_min);

struct NonAdaptiveReport {
  long long attempts = 0;
  long long accepted = 0;
  double final_threshold = 0;
  /// Largest nearest-neighbor distance at phase end; frozen as the
  /// boundary-classification radius for the adaptive phase.
  double boundary_radius = 0;
};

enum class AdaptiveStopReason {
  stall,        ///< estimated-minimum identity unchanged through the window
  cap,          ///< addition cap reached (reported as non-convergence)
  no_boundary,  ///< no boundary entry to expand from (degenerate)
};
const char* adaptive_stop_name(AdaptiveStopReason reason);

struct AdaptiveReport {
  long long attempts = 0;
  long long additions = 0;
  long long oracle_calls = 0;
  double final_threshold = 0;
  AdaptiveStopReason stop = AdaptiveStopReason::stall;
  /// Set indices (0-based) of the initial oracle design.
  std::vector<int> design;
  /// Minimum-estimate index after the design fit and after every
  /// subsequent oracle evaluation.
  std::vector<int> min_history;
  int final_min_index = -1;
  bool final_min_is_boundary = false;
};

/// Drives both expansion phases over a shared candidate set, carrying the
/// acceptance threshold from the first phase into the second.
///
/// Phase one grows the set from its sparsest member by perturbation,
/// accepting a proposal only when its distance to the set exceeds the
/// threshold; no oracle energy is consumed. Phase two evaluates an initial
/// oracle design (the original entries augmented to 10 p by the
/// space-filling criterion), fits the surrogate, then repeatedly perturbs
/// the boundary entry with the lowest estimated energy; every
/// `dft_cadence` accepted additions it spends one oracle call on the
/// overall minimum-estimate entry and refits.
class ExpansionEngine {
 public:
  /// The engine records the current set size as the "initial" entry count
  /// n0 (the seed rows of the phase-two oracle design).
  ExpansionEngine(CandidateSet& set, Perturber& perturber, const RunConfig& config);

  /// Grow the set to n1 entries. Throws NonConvergence after attempt_cap
  /// consecutive rejections.
  NonAdaptiveReport run_nonadaptive(long n1, RngStream& rng);

  /// Adaptive phase. Oracle evaluations are appended to the ledger with
  /// 1-based fingerprint ids (design batch under the initial phase tag,
  /// cadence evaluations under the adaptive tag).
  AdaptiveReport run_adaptive(EnergyOracle& oracle, EnergyLedger& ledger,
                              RngStream& rng);

  const std::vector<ExpansionTraceRow>& trace() const { return trace_; }
  bool has_threshold() const { return t_.has_value(); }
  double threshold() const;
  bool has_boundary_radius() const { return boundary_radius_.has_value(); }
  double boundary_radius() const;

  const GpModel* model() const { return model_ ? &*model_ : nullptr; }
  /// Post-fit energy estimates for every set entry (empty before phase two).
  const Eigen::VectorXd& estimates() const { return estimates_; }
  const PcaProjection* projection() const { return proj_ ? &*proj_ : nullptr; }
  /// Set indices of the oracle-evaluated entries, in evaluation order.
  const std::vector<int>& train_indices() const { return train_idx_; }
  const std::vector<double>& train_energies() const { return train_e_; }

 private:
  void fit_and_refresh(RngStream& rng);
  int overall_argmin() const;
  int select_boundary_min();
  bool entry_is_boundary(int i);
  void note_addition(const ProposedPoint& prop, int idx);

  CandidateSet& set_;
  Perturber& perturber_;
  RunConfig cfg_;
  int n0_;
  std::optional<double> t_;
  std::optional<double> boundary_radius_;
  std::vector<ExpansionTraceRow> trace_;

  std::optional<GpModel> model_;
  std::vector<int> train_idx_;
  std::vector<double> train_e_;
  Eigen::VectorXd estimates_;
  std::optional<PcaProjection> proj_;
  Eigen::MatrixXd coords_;          // boundary-classification coordinates
  std::vector<signed char> memo_;   // -1 unknown, 0 interior, 1 boundary
  int cached_src_ = -1;
  int fit_count_ = 0;
};

}  // namespace exex
