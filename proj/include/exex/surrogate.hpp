#pragma once

#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "exex/types.hpp"

namespace exex {

/// Hyperparameters of the Gaussian-kernel regressor. `nugget` is relative:
/// the covariance diagonal receives sigma2 * nugget.
struct GpHyperparams {
  double mu = 0;
  double sigma2 = 1;
  Eigen::VectorXd lengthscales;  // size p, one shared value when isotropic
  double nugget = 1e-8;
};

struct GpFitOptions {
  GpOptions base;
  std::uint64_t seed = 0;  // multi-start draw stream
  /// When set, skip hyperparameter search and use these lengthscales
  /// (mu and sigma2 are still profiled from the data).
  std::optional<Eigen::VectorXd> fixed_lengthscales;
  /// Lengthscales from a previous fit, used as the first ascent start.
  /// Warm-started refits of large training sets run a reduced search.
  std::optional<Eigen::VectorXd> warm_start;
};

/// Gaussian-process interpolator with constant mean.
///
/// Covariance C(x, x') = sigma2 * exp(-sum_k (x_k - x'_k)^2 / (2 l_k^2)).
/// The mean is profiled by generalized least squares and sigma2 by its
/// closed-form maximum-likelihood value, leaving only the lengthscales to
/// the multi-start ascent (resilient-propagation steps on log-lengthscales,
/// starts drawn log-uniform around the per-dimension median pairwise
/// distance heuristic). On a Cholesky failure the relative nugget escalates
/// by decades from 1e-8 to 1e-4 before the fit gives up and reports the
/// nearest pair of training inputs.
class GpModel {
 public:
  static GpModel fit(const Eigen::MatrixXd& S, const Eigen::VectorXd& e,
                     const GpFitOptions& options);

  /// Fit with every hyperparameter pinned (testing / closed-form checks).
  static GpModel fit_fixed(const Eigen::MatrixXd& S, const Eigen::VectorXd& e,
                           const GpHyperparams& hp);

  /// Fresh fit on the union of the stored data and the new rows, same
  /// options (and therefore the same start-draw seed path).
  GpModel refit(const Eigen::MatrixXd& new_rows,
                const Eigen::VectorXd& new_e) const;

  void predict(const Eigen::RowVectorXd& x, double* mean, double* sd) const;
  /// Means only, one row of X at a time (cheap path for estimate refresh).
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& X) const;
  /// Means and standard deviations for a batch.
  void predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd* mean,
                     Eigen::VectorXd* sd, int threads = 1) const;

  const GpHyperparams& params() const { return hp_; }
  double log_likelihood() const { return loglik_; }
  int training_count() const { return static_cast<int>(S_.rows()); }
  const Eigen::MatrixXd& inputs() const { return S_; }
  const Eigen::VectorXd& targets() const { return e_; }
  /// Weights w with C(S,S) w = e - mu 1 (for residual checks).
  Eigen::VectorXd weights() const;
  /// Covariance matrix C(S,S) + sigma2*nugget*I rebuilt from scratch.
  Eigen::MatrixXd covariance_matrix() const;

  std::string to_json() const;

  /// Concentrated log-likelihood and its gradient with respect to
  /// log-lengthscales at the given lengthscales (exposed for testing).
  static bool loglik_with_gradient(const Eigen::MatrixXd& S,
                                   const Eigen::VectorXd& e,
                                   const Eigen::VectorXd& lengthscales,
                                   double nugget, double* loglik,
                                   Eigen::VectorXd* grad);

 private:
  GpModel() = default;
  void finalize();  // build factorization from S_, e_, hp_

  Eigen::MatrixXd S_;
  Eigen::VectorXd e_;
  GpHyperparams hp_;
  GpFitOptions options_;
  Eigen::LLT<Eigen::MatrixXd> llt_;  // of R + nugget I (correlation scale)
  Eigen::VectorXd alpha_;            // (R + nugget I)^-1 (e - mu 1)
  double loglik_ = 0;
  bool degenerate_ = false;  // constant-target shortcut
};

}  // namespace exex
