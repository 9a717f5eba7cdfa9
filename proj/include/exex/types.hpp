#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "exex/crystal.hpp"
#include "exex/rng.hpp"

namespace exex {

/// A point in feature space. For vector test problems the configuration is
/// its own fingerprint; for crystals it is the structural descriptor vector.
using Fingerprint = Eigen::VectorXd;

enum class Phase { initial, adaptive, bo };
const char* phase_name(Phase phase);

/// Growing collection of fingerprints with a coherent nearest-neighbor
/// distance cache. Entries are append-only and addressed by insertion index.
class CandidateSet {
 public:
  explicit CandidateSet(int dim);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(points_.size()); }

  /// Append a fingerprint; returns its index. Throws std::invalid_argument
  /// on dimension mismatch, non-finite coordinates, or an exact duplicate
  /// of an existing entry.
  int add(const Fingerprint& fp);
  int add(const Fingerprint& fp, const CrystalConfiguration& cfg);

  const Fingerprint& point(int i) const { return points_[check(i)]; }
  /// Source configuration, or nullptr for vector problems.
  const CrystalConfiguration* config(int i) const;

  /// Cached distance to the nearest other entry (infinity for a singleton).
  double nn_dist(int i) const { return nn_dist_[check(i)]; }
  const std::vector<double>& nn_dists() const { return nn_dist_; }

  double distance(int i, int j) const;
  static double distance(const Fingerprint& a, const Fingerprint& b);

  /// Distance from an arbitrary point to the nearest entry.
  double nearest_distance(const Fingerprint& fp) const;

  /// All points as an n-by-dim matrix (row per entry).
  Eigen::MatrixXd as_matrix() const;
  /// Selected rows as a matrix.
  Eigen::MatrixXd rows_matrix(const std::vector<int>& indices) const;

 private:
  std::size_t check(int i) const;
  void validate(const Fingerprint& fp) const;
  int push(const Fingerprint& fp);

  int dim_;
  std::vector<Fingerprint> points_;
  std::vector<std::optional<CrystalConfiguration>> configs_;
  std::vector<double> nn_dist_;
};

struct LedgerRow {
  long ordinal;  // 1-based, gap-free
  Phase phase;
  int fingerprint_id;  // public 1-based id (set index + 1)
  double energy;
  double best_so_far;
};

/// Append-only record of every oracle evaluation with a running minimum.
class EnergyLedger {
 public:
  /// Throws std::invalid_argument on non-finite energy, naming the
  /// fingerprint index.
  void record(int fingerprint_id, double energy, Phase phase);

  bool empty() const { return rows_.empty(); }
  long size() const { return static_cast<long>(rows_.size()); }
  double best() const;
  int best_fingerprint() const;
  long count(Phase phase) const;
  const std::vector<LedgerRow>& rows() const { return rows_; }

 private:
  std::vector<LedgerRow> rows_;
};

/// Expensive black-box energy. Deterministic; every evaluation increments
/// the call counter by exactly one and non-finite results are rejected.
class EnergyOracle {
 public:
  virtual ~EnergyOracle() = default;

  double evaluate(const CandidateSet& set, int index);
  long long call_count() const { return calls_; }

 protected:
  virtual double energy_of(const CandidateSet& set, int index) = 0;

 private:
  long long calls_ = 0;
};

/// A proposed new point: fingerprint plus, for crystal problems, the
/// structure it was computed from.
struct ProposedPoint {
  Fingerprint fp;
  std::optional<CrystalConfiguration> cfg;
};

/// Perturb-and-fingerprint step used by the expansion loops: draw a
/// perturbation of entry `index` and return the fingerprint of the result.
class Perturber {
 public:
  virtual ~Perturber() = default;
  virtual ProposedPoint propose(const CandidateSet& set, int index,
                                RngStream& rng) = 0;
};

struct GpOptions {
  double nugget = 1e-8;   // relative diagonal jitter (fraction of sigma^2)
  bool anisotropic = true;
  int starts = 5;         // multi-start count for hyperparameter search
  int max_iter = 60;      // ascent iterations per start
  double tol = 1e-4;      // gradient sup-norm stopping tolerance
  bool scale_effort = true;  // shrink starts/iterations for large training sets
};

/// Knobs shared by the expansion/optimization pipeline.
struct RunConfig {
  int p = 0;                    // fingerprint dimension
  long n1_budget = 0;           // non-adaptive target size (0 -> 100 p)
  int n0 = 0;                   // initial set size (0 -> 10 p)
  int dft_cadence = 10;         // oracle evaluation every this many additions
  int stall_limit = 10;         // unchanged-argmin window that stops phase two
  double t_ei_factor = 1e-5;    // relative expected-improvement stop factor
  std::uint64_t rng_seed = 12345;
  long attempt_cap = 100000;  // consecutive-rejection abort threshold
  /// Phase-two addition cap = this * p. A safety valve only: generous enough
  /// that the unchanged-argmin stall rule, not the cap, ends a healthy run.
  int adaptive_cap_per_p = 200;
  int threads = 0;              // 0 -> hardware concurrency
  GpOptions gp;

  long resolved_n1() const { return n1_budget > 0 ? n1_budget : 100L * p; }
  int resolved_n0() const { return n0 > 0 ? n0 : 10 * p; }
  long adaptive_cap() const { return static_cast<long>(adaptive_cap_per_p) * p; }
};

/// Thrown when an algorithmic loop fails to converge (caps exhausted);
/// the CLI maps it to exit code 2.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int resolve_threads(int requested);

/// Run fn(i) for i in [0, n). Results must be written to disjoint slots so
/// the outcome is identical for any thread count.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

}  // namespace exex
