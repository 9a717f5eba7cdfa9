#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

#include "exex/agni.hpp"
#include "exex/crystal.hpp"
#include "exex/designs.hpp"
#include "exex/rng.hpp"
#include "exex/types.hpp"

namespace exex {

// ---------------------------------------------------------------------------
// Analytic benchmark functions (evaluated without box clamping: expansion is
// free to leave the initial sub-space; the boxes are reporting aids only).
// ---------------------------------------------------------------------------

/// Sum of squares; global minimum 0 at the origin.
double sphere_value(const Eigen::VectorXd& x);

/// 418.9829 p − Σ x_k sin(√|x_k|); near-zero minimum at x_k ≈ 420.9687.
double schwefel_value(const Eigen::VectorXd& x);

/// Standard two-dimensional Branin function. Throws unless x has size 2.
double branin_value(const Eigen::VectorXd& x);

/// Coordinate of the Schwefel minimizer on the conventional domain.
double schwefel_minimizer_coordinate();

Box sphere_domain(int p);       // [-5.12, 5.12]^p
Box sphere_start_box(int p);    // [1.5, 4]^p
Box schwefel_domain(int p);     // [-500, 500]^p
Box schwefel_start_box(int p);  // [250, 400]^p
Box branin_domain();            // [-5, 10] x [0, 15]

enum class ProblemKind { sphere, schwefel, branin, lj_crystal };

/// Parses "sphere" | "schwefel" | "branin" | "lj_crystal"; throws
/// std::invalid_argument naming the offending value otherwise.
ProblemKind parse_problem(const std::string& name);
const char* problem_name(ProblemKind kind);

/// The analytic function for a vector problem kind (not lj_crystal).
std::function<double(const Eigen::VectorXd&)> problem_function(ProblemKind kind);
Box problem_start_box(ProblemKind kind, int p);

// ---------------------------------------------------------------------------
// Oracles.
// ---------------------------------------------------------------------------

/// Metered oracle around a deterministic vector function. `raw` evaluates
/// without touching the call counter (reporting only).
class FunctionOracle : public EnergyOracle {
 public:
  explicit FunctionOracle(std::function<double(const Eigen::VectorXd&)> fn)
      : fn_(std::move(fn)) {}

  double raw(const Eigen::VectorXd& x) const { return fn_(x); }

 protected:
  double energy_of(const CandidateSet& set, int index) override {
    return fn_(set.point(index));
  }

 private:
  std::function<double(const Eigen::VectorXd&)> fn_;
};

struct LjParams {
  double epsilon = 1.0;  // eV
  double sigma = 2.5;    // Angstrom
  double r_cut = 8.0;    // Angstrom, shared with the fingerprint cutoff
};

/// Periodic pairwise Lennard-Jones energy, shifted so the pair potential is
/// continuous (zero) at the cutoff. Throws std::domain_error when any pair
/// distance falls below 0.1 sigma (unphysical overlap).
double lj_energy(const CrystalConfiguration& cfg, const LjParams& params);

/// Metered oracle evaluating lj_energy on the entry's stored structure.
class LjOracle : public EnergyOracle {
 public:
  explicit LjOracle(LjParams params) : params_(params) {}
  const LjParams& params() const { return params_; }

 protected:
  double energy_of(const CandidateSet& set, int index) override;

 private:
  LjParams params_;
};

// ---------------------------------------------------------------------------
// Perturbers.
// ---------------------------------------------------------------------------

/// x plus independent zero-mean normal draws with per-component sd.
/// diag_sd must be non-negative componentwise (zero returns x exactly).
Eigen::VectorXd mvn_perturb(const Eigen::VectorXd& x, const Eigen::VectorXd& diag_sd,
                            RngStream& rng);

/// Vector-problem perturber. The sd vector is fixed at construction; the
/// pipeline sets every component to the square root of the mean
/// nearest-neighbor distance of the initial candidate set.
class MvnPerturber : public Perturber {
 public:
  explicit MvnPerturber(Eigen::VectorXd diag_sd);

  /// Constant sd from a set: sqrt(mean nearest-neighbor distance).
  static MvnPerturber from_initial_set(const CandidateSet& set);

  const Eigen::VectorXd& diag_sd() const { return diag_sd_; }

  ProposedPoint propose(const CandidateSet& set, int index, RngStream& rng) override;

 private:
  Eigen::VectorXd diag_sd_;
};

/// Crystal perturber: displace every atom uniformly within a Cartesian ball
/// of radius max_disp, then fingerprint the result. A positive
/// min_pair_floor redraws any proposal whose minimum pair distance falls
/// below it, keeping every set member inside the energy oracle's physical
/// domain (the oracle rejects overlapping atoms).
class CrystalPerturber : public Perturber {
 public:
  CrystalPerturber(double max_disp, AgniParams params, double min_pair_floor = 0.0)
      : max_disp_(max_disp), params_(params), min_pair_floor_(min_pair_floor) {}

  ProposedPoint propose(const CandidateSet& set, int index, RngStream& rng) override;

 private:
  double max_disp_;
  AgniParams params_;
  double min_pair_floor_;
};

}  // namespace exex
