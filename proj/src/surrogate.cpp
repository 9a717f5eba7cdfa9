#include "exex/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "exex/format.hpp"
#include "exex/rng.hpp"

namespace exex {

namespace {

constexpr double kLogLoBound = -13.815510557964274;  // log(1e-6)
constexpr double kLogHiBound = 13.815510557964274;   // log(1e6)

/// Squared differences along one dimension for all training pairs.
std::vector<Eigen::MatrixXd> pairwise_sq(const Eigen::MatrixXd& S) {
  const Eigen::Index m = S.rows();
  const Eigen::Index p = S.cols();
  std::vector<Eigen::MatrixXd> d2(static_cast<std::size_t>(p));
  for (Eigen::Index k = 0; k < p; ++k) {
    Eigen::VectorXd col = S.col(k);
    Eigen::MatrixXd diff = col.replicate(1, m) - col.transpose().replicate(m, 1);
    d2[static_cast<std::size_t>(k)] = diff.cwiseProduct(diff);
  }
  return d2;
}

Eigen::MatrixXd correlation_from_d2(const std::vector<Eigen::MatrixXd>& d2,
                                    const Eigen::VectorXd& ls) {
  const Eigen::Index m = d2.empty() ? 0 : d2[0].rows();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < d2.size(); ++k) {
    double w = 0.5 / (ls[static_cast<Eigen::Index>(k)] *
                      ls[static_cast<Eigen::Index>(k)]);
    q.noalias() += w * d2[k];
  }
  return (-q).array().exp().matrix();
}

struct ProfiledFit {
  bool ok = false;
  double mu = 0, sigma2 = 0, loglik = -std::numeric_limits<double>::infinity();
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;  // (R+nI)^-1 (e - mu 1)
};

/// Profile mu (GLS) and sigma2 (closed-form ML) at fixed lengthscales.
ProfiledFit profile(const Eigen::MatrixXd& R, const Eigen::VectorXd& e,
                    double nugget) {
  ProfiledFit out;
  const Eigen::Index m = e.size();
  Eigen::MatrixXd Rn = R;
  Rn.diagonal().array() += nugget;
  out.llt.compute(Rn);
  if (out.llt.info() != Eigen::Success) return out;
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd u = out.llt.solve(ones);
  Eigen::VectorXd v = out.llt.solve(e);
  double denom = ones.dot(u);
  if (!(denom > 0) || !std::isfinite(denom)) return out;
  out.mu = ones.dot(v) / denom;
  out.alpha = v - out.mu * u;
  double s2 = (e.array() - out.mu).matrix().dot(out.alpha) /
              static_cast<double>(m);
  if (!(s2 >= 0) || !std::isfinite(s2)) return out;
  out.sigma2 = s2;
  double logdet = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    logdet += 2.0 * std::log(out.llt.matrixLLT()(i, i));
  double floor = 1e-300;
  out.loglik = -0.5 * static_cast<double>(m) * std::log(std::max(s2, floor)) -
               0.5 * logdet;
  out.ok = std::isfinite(out.loglik);
  return out;
}

/// Concentrated log-likelihood and gradient w.r.t. log-lengthscales.
bool eval_loglik_grad(const std::vector<Eigen::MatrixXd>& d2,
                      const Eigen::VectorXd& e, const Eigen::VectorXd& ls,
                      double nugget, double* ll, Eigen::VectorXd* grad) {
  const Eigen::Index m = e.size();
  Eigen::MatrixXd R = correlation_from_d2(d2, ls);
  ProfiledFit pf = profile(R, e, nugget);
  if (!pf.ok) return false;
  *ll = pf.loglik;
  if (!grad) return true;

  double s2 = std::max(pf.sigma2, 1e-300);
  Eigen::MatrixXd Rinv =
      pf.llt.solve(Eigen::MatrixXd::Identity(m, m));
  // d(ll)/d theta_k = 0.5 * tr[(alpha alpha^T / s2 - Rinv) dR/d theta_k]
  // with dR/d(log l_k) = R .* d2_k / l_k^2.
  Eigen::MatrixXd W =
      ((pf.alpha * pf.alpha.transpose()) / s2 - Rinv).cwiseProduct(R);
  grad->resize(static_cast<Eigen::Index>(d2.size()));
  for (std::size_t k = 0; k < d2.size(); ++k) {
    double lk = ls[static_cast<Eigen::Index>(k)];
    (*grad)[static_cast<Eigen::Index>(k)] =
        0.5 * W.cwiseProduct(d2[k]).sum() / (lk * lk);
  }
  return grad->allFinite();
}

/// Per-dimension median of non-zero pairwise absolute differences.
Eigen::VectorXd lengthscale_heuristic(const Eigen::MatrixXd& S) {
  const Eigen::Index m = S.rows();
  const Eigen::Index p = S.cols();
  Eigen::VectorXd h(p);
  std::vector<double> diffs;
  for (Eigen::Index k = 0; k < p; ++k) {
    diffs.clear();
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i + 1; j < m; ++j) {
        double d = std::abs(S(i, k) - S(j, k));
        if (d > 0) diffs.push_back(d);
      }
    if (diffs.empty()) {
      h[k] = 1.0;
      continue;
    }
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2,
                     diffs.end());
    h[k] = std::clamp(diffs[diffs.size() / 2], 1e-6, 1e6);
  }
  return h;
}

std::pair<Eigen::Index, Eigen::Index> nearest_pair(const Eigen::MatrixXd& S) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<Eigen::Index, Eigen::Index> arg{0, 1};
  for (Eigen::Index i = 0; i < S.rows(); ++i)
    for (Eigen::Index j = i + 1; j < S.rows(); ++j) {
      double d = (S.row(i) - S.row(j)).norm();
      if (d < best) {
        best = d;
        arg = {i, j};
      }
    }
  return arg;
}

/// Effort schedule: large training sets get fewer starts and iterations so
/// repeated refits stay tractable, and warm-started refits (one new row at
/// a time) run a reduced search. Deterministic in data size and options.
void effective_effort(const GpOptions& base, Eigen::Index m, bool warm,
                      int* starts, int* iters) {
  *starts = std::max(1, base.starts);
  *iters = std::max(1, base.max_iter);
  if (!base.scale_effort) return;
  if (warm) {
    if (m > 80) {
      *starts = 1;
      *iters = std::min(*iters, 25);
    } else {
      *starts = std::min(*starts, 2);
      *iters = std::min(*iters, 40);
    }
    return;
  }
  if (m > 320) {
    *starts = std::min(*starts, 2);
    *iters = std::min(*iters, 30);
  } else if (m > 160) {
    *starts = std::min(*starts, 3);
    *iters = std::min(*iters, 40);
  } else if (m > 80) {
    *starts = std::min(*starts, 4);
    *iters = std::min(*iters, 50);
  }
}

}  // namespace

bool GpModel::loglik_with_gradient(const Eigen::MatrixXd& S,
                                   const Eigen::VectorXd& e,
                                   const Eigen::VectorXd& lengthscales,
                                   double nugget, double* loglik,
                                   Eigen::VectorXd* grad) {
  return eval_loglik_grad(pairwise_sq(S), e, lengthscales, nugget, loglik,
                          grad);
}

void GpModel::finalize() {
  const Eigen::Index m = S_.rows();
  std::vector<Eigen::MatrixXd> d2 = pairwise_sq(S_);
  double nugget = hp_.nugget;
  while (true) {
    Eigen::MatrixXd R = correlation_from_d2(d2, hp_.lengthscales);
    ProfiledFit pf = profile(R, e_, nugget);
    if (pf.ok && pf.sigma2 > 0) {
      hp_.mu = pf.mu;
      hp_.sigma2 = pf.sigma2;
      hp_.nugget = nugget;
      llt_ = pf.llt;
      alpha_ = pf.alpha;
      loglik_ = pf.loglik;
      return;
    }
    if (pf.ok && pf.sigma2 == 0) {
      // Constant (or perfectly GLS-fit) targets: keep the mean, use a tiny
      // spread so predictions revert to mu with ~zero uncertainty.
      hp_.mu = pf.mu;
      hp_.sigma2 = 0;
      hp_.nugget = nugget;
      llt_ = pf.llt;
      alpha_ = pf.alpha;
      loglik_ = 0;
      degenerate_ = true;
      return;
    }
    if (nugget >= 1e-4) {
      auto [i, j] = nearest_pair(S_);
      std::ostringstream msg;
      msg << "GpModel: covariance not positive definite after nugget "
             "escalation to 1e-4; nearest training inputs are rows "
          << i << " and " << j << " at distance "
          << (S_.row(i) - S_.row(j)).norm();
      throw std::runtime_error(msg.str());
    }
    nugget *= 10.0;
  }
}

GpModel GpModel::fit(const Eigen::MatrixXd& S, const Eigen::VectorXd& e,
                     const GpFitOptions& options) {
  const Eigen::Index m = S.rows();
  if (m < 2) throw std::invalid_argument("GpModel::fit: need at least 2 rows");
  if (e.size() != m)
    throw std::invalid_argument("GpModel::fit: target length mismatch");
  {
    auto [i, j] = nearest_pair(S);
    if ((S.row(i) - S.row(j)).norm() == 0) {
      std::ostringstream msg;
      msg << "GpModel::fit: duplicate training inputs at rows " << i << " and "
          << j;
      throw std::invalid_argument(msg.str());
    }
  }

  GpModel model;
  model.S_ = S;
  model.e_ = e;
  model.options_ = options;
  model.hp_.nugget = options.base.nugget;

  const Eigen::Index p = S.cols();
  const bool iso = !options.base.anisotropic;
  Eigen::VectorXd heur = lengthscale_heuristic(S);
  if (iso) {
    double g = std::exp(heur.array().log().mean());
    heur.setConstant(g);
  }

  const double spread = e.maxCoeff() - e.minCoeff();
  if (options.fixed_lengthscales) {
    model.hp_.lengthscales = *options.fixed_lengthscales;
    model.finalize();
    return model;
  }
  if (spread == 0) {
    model.hp_.lengthscales = heur;
    model.finalize();
    return model;
  }

  Eigen::VectorXd warm;
  if (options.warm_start) {
    if (options.warm_start->size() != p)
      throw std::invalid_argument("GpModel::fit: warm-start dimension mismatch");
    if (!(options.warm_start->minCoeff() > 0))
      throw std::invalid_argument("GpModel::fit: warm-start lengthscales must be positive");
    warm = *options.warm_start;
    if (iso) {
      double g = std::exp(warm.array().log().mean());
      warm.setConstant(g);
    }
  }

  std::vector<Eigen::MatrixXd> d2 = pairwise_sq(S);
  int n_starts = 0, n_iter = 0;
  effective_effort(options.base, m, warm.size() > 0, &n_starts, &n_iter);

  RngStream rng(options.seed, "gp-starts");
  const int dims = iso ? 1 : static_cast<int>(p);
  Eigen::VectorXd best_theta;
  double best_ll = -std::numeric_limits<double>::infinity();

  auto expand = [&](const Eigen::VectorXd& theta) {
    // Map optimizer parameters to full lengthscale vector.
    Eigen::VectorXd ls(p);
    if (iso)
      ls.setConstant(std::exp(theta[0]));
    else
      ls = theta.array().exp();
    return ls;
  };
  auto collapse_grad = [&](const Eigen::VectorXd& g) {
    if (!iso) return g;
    Eigen::VectorXd s(1);
    s[0] = g.sum();
    return s;
  };

  const bool have_warm = warm.size() > 0;
  for (int start = 0; start < n_starts; ++start) {
    // Start order: previous lengthscales (when warm), then the heuristic,
    // then heuristic points jittered log-uniform within one decade.
    const bool warm_start = have_warm && start == 0;
    const bool plain_start = start == (have_warm ? 1 : 0);
    Eigen::VectorXd theta(dims);
    for (int k = 0; k < dims; ++k) {
      double base = std::log(warm_start ? (iso ? warm[0] : warm[k])
                                        : (iso ? heur[0] : heur[k]));
      double jitter = (warm_start || plain_start)
                          ? 0.0
                          : rng.uniform(-1.0, 1.0) * std::log(10.0);
      theta[k] = std::clamp(base + jitter, kLogLoBound, kLogHiBound);
    }
    Eigen::VectorXd step = Eigen::VectorXd::Constant(dims, 0.1);
    Eigen::VectorXd prev_sign = Eigen::VectorXd::Zero(dims);
    double ll = 0;
    Eigen::VectorXd grad_full;
    bool ok = eval_loglik_grad(d2, e, expand(theta), options.base.nugget, &ll,
                               &grad_full);
    if (ok && ll > best_ll) {
      best_ll = ll;
      best_theta = expand(theta).array().log();
    }
    if (!ok) continue;
    Eigen::VectorXd grad = collapse_grad(grad_full);

    for (int it = 0; it < n_iter; ++it) {
      if (grad.cwiseAbs().maxCoeff() < options.base.tol) break;
      for (int k = 0; k < dims; ++k) {
        double s = grad[k] > 0 ? 1.0 : (grad[k] < 0 ? -1.0 : 0.0);
        if (s * prev_sign[k] > 0)
          step[k] = std::min(step[k] * 1.2, 0.5);
        else if (s * prev_sign[k] < 0)
          step[k] = std::max(step[k] * 0.5, 1e-6);
        theta[k] = std::clamp(theta[k] + s * step[k], kLogLoBound, kLogHiBound);
        prev_sign[k] = s;
      }
      ok = eval_loglik_grad(d2, e, expand(theta), options.base.nugget, &ll,
                            &grad_full);
      if (!ok) {
        // Retreat: the iterate left the numerically stable region.
        for (int k = 0; k < dims; ++k) {
          theta[k] -= prev_sign[k] * step[k];
          step[k] = std::max(step[k] * 0.25, 1e-6);
        }
        prev_sign.setZero();
        continue;
      }
      grad = collapse_grad(grad_full);
      if (ll > best_ll) {
        best_ll = ll;
        best_theta = expand(theta).array().log();
      }
    }
  }

  if (best_theta.size() == 0)
    model.hp_.lengthscales = heur;
  else
    model.hp_.lengthscales = best_theta.array().exp();
  model.finalize();
  return model;
}

GpModel GpModel::fit_fixed(const Eigen::MatrixXd& S, const Eigen::VectorXd& e,
                           const GpHyperparams& hp) {
  if (S.rows() < 2)
    throw std::invalid_argument("GpModel::fit_fixed: need at least 2 rows");
  GpModel model;
  model.S_ = S;
  model.e_ = e;
  model.hp_ = hp;
  model.options_.base.nugget = hp.nugget;
  model.options_.fixed_lengthscales = hp.lengthscales;

  // Honor the given mu/sigma2 exactly: build the factorization directly.
  const Eigen::Index m = S.rows();
  Eigen::MatrixXd R = correlation_from_d2(pairwise_sq(S), hp.lengthscales);
  R.diagonal().array() += hp.nugget;
  model.llt_.compute(R);
  if (model.llt_.info() != Eigen::Success)
    throw std::runtime_error("GpModel::fit_fixed: covariance not positive definite");
  model.alpha_ = model.llt_.solve(
      (e.array() - hp.mu).matrix());
  double logdet = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    logdet += 2.0 * std::log(model.llt_.matrixLLT()(i, i));
  double quad = (e.array() - hp.mu).matrix().dot(model.alpha_) /
                std::max(hp.sigma2, 1e-300);
  model.loglik_ = -0.5 * (static_cast<double>(m) *
                              std::log(2.0 * 3.141592653589793 *
                                       std::max(hp.sigma2, 1e-300)) +
                          logdet + quad);
  return model;
}

GpModel GpModel::refit(const Eigen::MatrixXd& new_rows,
                       const Eigen::VectorXd& new_e) const {
  const Eigen::Index m = S_.rows();
  const Eigen::Index add = new_rows.rows();
  Eigen::MatrixXd S(m + add, S_.cols());
  S.topRows(m) = S_;
  S.bottomRows(add) = new_rows;
  Eigen::VectorXd e(m + add);
  e.head(m) = e_;
  e.tail(add) = new_e;
  return fit(S, e, options_);
}

void GpModel::predict(const Eigen::RowVectorXd& x, double* mean,
                      double* sd) const {
  const Eigen::Index m = S_.rows();
  Eigen::VectorXd r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double q = 0;
    for (Eigen::Index k = 0; k < S_.cols(); ++k) {
      double d = x[k] - S_(i, k);
      double l = hp_.lengthscales[k];
      q += d * d / (2.0 * l * l);
    }
    r[i] = std::exp(-q);
  }
  if (mean) *mean = hp_.mu + r.dot(alpha_);
  if (sd) {
    Eigen::VectorXd rin = llt_.solve(r);
    double s2 = hp_.sigma2 * std::max(0.0, 1.0 - r.dot(rin));
    *sd = std::sqrt(s2);
  }
}

Eigen::VectorXd GpModel::predict_mean(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double mean = 0;
    predict(X.row(i), &mean, nullptr);
    out[i] = mean;
  }
  return out;
}

void GpModel::predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd* mean,
                            Eigen::VectorXd* sd, int threads) const {
  const Eigen::Index n = X.rows();
  if (mean) mean->resize(n);
  if (sd) sd->resize(n);
  parallel_for(n, threads, [&](long i) {
    double m = 0, s = 0;
    predict(X.row(i), mean ? &m : nullptr, sd ? &s : nullptr);
    if (mean) (*mean)[i] = m;
    if (sd) (*sd)[i] = s;
  });
}

Eigen::VectorXd GpModel::weights() const {
  double s2 = std::max(hp_.sigma2, 1e-300);
  return alpha_ / s2;
}

Eigen::MatrixXd GpModel::covariance_matrix() const {
  Eigen::MatrixXd R = correlation_from_d2(pairwise_sq(S_), hp_.lengthscales);
  R.diagonal().array() += hp_.nugget;
  return hp_.sigma2 * R;
}

std::string GpModel::to_json() const {
  std::ostringstream out;
  out << "{\"mu\": " << fmt_g12(hp_.mu)
      << ", \"sigma2\": " << fmt_g12(hp_.sigma2) << ", \"lengthscales\": [";
  for (Eigen::Index k = 0; k < hp_.lengthscales.size(); ++k) {
    if (k) out << ", ";
    out << fmt_g12(hp_.lengthscales[k]);
  }
  out << "], \"nugget\": " << fmt_g12(hp_.nugget)
      << ", \"log_likelihood\": " << fmt_g12(loglik_)
      << ", \"training_count\": " << S_.rows()
      << ", \"dim\": " << S_.cols() << "}";
  return out.str();
}

}  // namespace exex
