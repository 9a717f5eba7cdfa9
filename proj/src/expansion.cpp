#include "exex/expansion.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "exex/designs.hpp"

namespace exex {

double initial_threshold(const CandidateSet& set) {
  if (set.size() < 2)
    throw std::invalid_argument("initial_threshold: need at least two entries");
  double sum = 0;
  for (double d : set.nn_dists()) sum += d;
  return sum / set.size();
}

double threshold_update(double t, double d_min) {
  if (!(t > 0)) throw std::invalid_argument("threshold_update: t must be positive");
  if (!(d_min >= 0))
    throw std::invalid_argument("threshold_update: d_min must be non-negative");
  return 0.5 * (t + d_min);
}

const char* adaptive_stop_name(AdaptiveStopReason reason) {
  switch (reason) {
    case AdaptiveStopReason::stall: return "stall";
    case AdaptiveStopReason::cap: return "cap";
    case AdaptiveStopReason::no_boundary: return "no_boundary";
  }
  return "unknown";
}

ExpansionEngine::ExpansionEngine(CandidateSet& set, Perturber& perturber,
                                 const RunConfig& config)
    : set_(set), perturber_(perturber), cfg_(config), n0_(set.size()) {}

double ExpansionEngine::threshold() const {
  if (!t_) throw std::logic_error("ExpansionEngine: threshold not initialized");
  return *t_;
}

double ExpansionEngine::boundary_radius() const {
  if (!boundary_radius_)
    throw std::logic_error("ExpansionEngine: boundary radius not set");
  return *boundary_radius_;
}

NonAdaptiveReport ExpansionEngine::run_nonadaptive(long n1, RngStream& rng) {
  if (set_.size() < 2)
    throw std::invalid_argument(
        "run_nonadaptive: need an initial set of at least two entries");
  if (n1 < set_.size())
    throw std::invalid_argument("run_nonadaptive: budget below current set size");
  if (!t_) t_ = initial_threshold(set_);

  NonAdaptiveReport rep;
  const int start_size = set_.size();
  if (set_.size() < n1) {
    DirectionalCache cache(set_);
    long consecutive_rejects = 0;
    long long attempt_no = 0;
    while (set_.size() < n1) {
      int src = cache.sparsest();
      ProposedPoint prop = perturber_.propose(set_, src, rng);
      double d = set_.nearest_distance(prop.fp);
      double t_before = *t_;
      bool accept = d > t_before;
      ++attempt_no;
      if (accept) {
        int idx = prop.cfg ? set_.add(prop.fp, *prop.cfg) : set_.add(prop.fp);
        cache.on_add(set_, idx);
        consecutive_rejects = 0;
      } else {
        ++consecutive_rejects;
      }
      ExpansionTraceRow row;
      row.attempt = attempt_no;
      row.accepted = accept;
      row.t_before = t_before;
      row.d_min = d;
      row.set_size = set_.size();
      row.phase = Phase::initial;
      trace_.push_back(row);
      t_ = threshold_update(t_before, d);
      if (!accept && consecutive_rejects >= cfg_.attempt_cap) {
        std::ostringstream msg;
        msg << "non-adaptive expansion stalled: " << consecutive_rejects
            << " consecutive rejections; threshold " << *t_
            << " sits above the achievable perturbation spread";
        throw NonConvergence(msg.str());
      }
    }
    rep.attempts = attempt_no;
  }
  rep.accepted = set_.size() - start_size;
  rep.final_threshold = *t_;
  boundary_radius_ = max_nn_distance(set_);
  rep.boundary_radius = *boundary_radius_;
  return rep;
}

void ExpansionEngine::fit_and_refresh(RngStream& rng) {
  Eigen::MatrixXd S = set_.rows_matrix(train_idx_);
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(
      train_e_.data(), static_cast<Eigen::Index>(train_e_.size()));
  GpFitOptions opts;
  opts.base = cfg_.gp;
  opts.seed = mix_seed(rng.base_seed(), "gp-fit-" + std::to_string(fit_count_));
  if (model_) opts.warm_start = model_->params().lengthscales;
  model_ = GpModel::fit(S, e, opts);
  ++fit_count_;

  Eigen::MatrixXd all = set_.as_matrix();
  estimates_ = model_->predict_mean(all);
  if (set_.dim() > 3) {
    proj_ = pca_fit_up_to(all, 3);
    coords_ = proj_->project_rows(all);
  } else {
    proj_.reset();
    coords_ = all;
  }
  memo_.assign(static_cast<std::size_t>(set_.size()), -1);
  cached_src_ = -1;
}

int ExpansionEngine::overall_argmin() const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(estimates_.size()); ++i)
    if (estimates_[i] < estimates_[best]) best = i;
  return best;
}

bool ExpansionEngine::entry_is_boundary(int i) {
  signed char& slot = memo_[static_cast<std::size_t>(i)];
  if (slot < 0)
    slot = is_boundary_in_coords(coords_, i, *boundary_radius_) ? 1 : 0;
  return slot == 1;
}

int ExpansionEngine::select_boundary_min() {
  if (cached_src_ >= 0) return cached_src_;
  std::vector<int> order(static_cast<std::size_t>(set_.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (estimates_[a] != estimates_[b]) return estimates_[a] < estimates_[b];
    return a < b;
  });
  for (int i : order) {
    if (entry_is_boundary(i)) {
      cached_src_ = i;
      return i;
    }
  }
  return -1;
}

void ExpansionEngine::note_addition(const ProposedPoint& prop, int idx) {
  double mean = 0;
  model_->predict(prop.fp.transpose(), &mean, nullptr);
  estimates_.conservativeResize(idx + 1);
  estimates_[idx] = mean;
  Eigen::RowVectorXd c =
      proj_ ? Eigen::RowVectorXd(proj_->project(prop.fp)) : prop.fp.transpose();
  coords_.conservativeResize(idx + 1, Eigen::NoChange);
  coords_.row(idx) = c;
  // A new member can only turn boundary entries interior, never the
  // reverse, so cached interior verdicts stay valid.
  for (signed char& m : memo_) {
    if (m == 1) m = -1;
  }
  memo_.push_back(-1);
  cached_src_ = -1;
}

AdaptiveReport ExpansionEngine::run_adaptive(EnergyOracle& oracle,
                                             EnergyLedger& ledger, RngStream& rng) {
  const int p = set_.dim();
  if (set_.size() < 2)
    throw std::invalid_argument("run_adaptive: need at least two entries");
  if (!t_) t_ = initial_threshold(set_);
  if (!boundary_radius_) boundary_radius_ = max_nn_distance(set_);

  AdaptiveReport rep;

  // Initial oracle design: the n0 seed entries, space-filling augmented
  // from the rest of the set up to 10 p members.
  const long design_size = std::min<long>(10L * p, set_.size());
  const long seed_count = std::min<long>(n0_, design_size);
  for (long i = 0; i < seed_count; ++i) rep.design.push_back(static_cast<int>(i));
  if (design_size > seed_count) {
    std::vector<int> pool_idx;
    for (int i = static_cast<int>(seed_count); i < set_.size(); ++i)
      pool_idx.push_back(i);
    Eigen::MatrixXd existing = set_.rows_matrix(rep.design);
    Eigen::MatrixXd pool = set_.rows_matrix(pool_idx);
    std::vector<int> picks =
        maxpro_augment(existing, pool, static_cast<int>(design_size - seed_count));
    for (int pick : picks)
      rep.design.push_back(pool_idx[static_cast<std::size_t>(pick)]);
  }
  for (int idx : rep.design) {
    double e = oracle.evaluate(set_, idx);
    ledger.record(idx + 1, e, Phase::initial);
    train_idx_.push_back(idx);
    train_e_.push_back(e);
  }
  long long calls = static_cast<long long>(rep.design.size());
  fit_and_refresh(rng);

  int prev_argmin = overall_argmin();
  rep.min_history.push_back(prev_argmin);
  int unchanged_streak = 0;

  long long attempt_no = 0;
  long additions = 0;
  long consecutive_rejects = 0;
  const long cap = cfg_.adaptive_cap();

  while (true) {
    if (unchanged_streak >= cfg_.stall_limit) {
      rep.stop = AdaptiveStopReason::stall;
      break;
    }
    if (additions >= cap) {
      rep.stop = AdaptiveStopReason::cap;
      break;
    }
    int src = select_boundary_min();
    if (src < 0) {
      rep.stop = AdaptiveStopReason::no_boundary;
      break;
    }

    ProposedPoint prop = perturber_.propose(set_, src, rng);
    double d = set_.nearest_distance(prop.fp);
    double t_before = *t_;
    bool accept = d > t_before;
    ++attempt_no;
    if (accept) {
      int idx = prop.cfg ? set_.add(prop.fp, *prop.cfg) : set_.add(prop.fp);
      note_addition(prop, idx);
      ++additions;
      consecutive_rejects = 0;
    } else {
      ++consecutive_rejects;
    }
    ExpansionTraceRow row;
    row.attempt = attempt_no;
    row.accepted = accept;
    row.t_before = t_before;
    row.d_min = d;
    row.set_size = set_.size();
    row.phase = Phase::adaptive;
    row.min_est_idx = src + 1;
    row.oracle_calls = calls;
    trace_.push_back(row);
    t_ = threshold_update(t_before, d);
    if (!accept && consecutive_rejects >= cfg_.attempt_cap) {
      std::ostringstream msg;
      msg << "adaptive expansion stalled: " << consecutive_rejects
          << " consecutive rejections; threshold " << *t_
          << " sits above the achievable perturbation spread";
      throw NonConvergence(msg.str());
    }

    if (accept && additions % cfg_.dft_cadence == 0) {
      int target = overall_argmin();
      double e = oracle.evaluate(set_, target);
      ledger.record(target + 1, e, Phase::adaptive);
      ++calls;
      bool known = std::find(train_idx_.begin(), train_idx_.end(), target) !=
                   train_idx_.end();
      if (!known) {
        train_idx_.push_back(target);
        train_e_.push_back(e);
      }
      fit_and_refresh(rng);
      int now_argmin = overall_argmin();
      rep.min_history.push_back(now_argmin);
      if (now_argmin == prev_argmin)
        ++unchanged_streak;
      else
        unchanged_streak = 0;
      prev_argmin = now_argmin;
    }
  }

  rep.attempts = attempt_no;
  rep.additions = additions;
  rep.oracle_calls = calls;
  rep.final_threshold = *t_;
  rep.final_min_index = overall_argmin();
  rep.final_min_is_boundary = entry_is_boundary(rep.final_min_index);
  return rep;
}

}  // namespace exex
