#include "exex/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "exex/designs.hpp"
#include "exex/rng.hpp"

namespace exex {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

double expected_improvement(double mean, double sd, double e_min) {
  if (!(sd >= 0))
    throw std::invalid_argument("expected_improvement: sd must be non-negative");
  const double diff = e_min - mean;
  if (sd == 0) return std::max(0.0, diff);
  const double z = diff / sd;
  const double big_phi = 0.5 * std::erfc(-z / kSqrt2);
  const double small_phi = kInvSqrt2Pi * std::exp(-0.5 * z * z);
  return std::max(0.0, diff * big_phi + sd * small_phi);
}

const char* bo_stop_name(BoStopReason reason) {
  switch (reason) {
    case BoStopReason::converged: return "converged";
    case BoStopReason::duplicate: return "duplicate";
    case BoStopReason::cap: return "cap";
  }
  return "unknown";
}

ArgmaxEiResult argmax_ei(const GpModel& model, const CandidateSet& set,
                         const std::vector<int>& evaluated, double e_min,
                         int threads) {
  const int n = set.size();
  if (n < 1) throw std::invalid_argument("argmax_ei: empty candidate set");
  std::vector<char> is_eval(static_cast<std::size_t>(n), 0);
  for (int idx : evaluated) is_eval[static_cast<std::size_t>(idx)] = 1;
  int first_unevaluated = -1;
  for (int i = 0; i < n; ++i)
    if (!is_eval[static_cast<std::size_t>(i)]) {
      first_unevaluated = i;
      break;
    }
  if (first_unevaluated < 0)
    throw std::invalid_argument("argmax_ei: every candidate already evaluated");

  Eigen::VectorXd mean, sd;
  model.predict_batch(set.as_matrix(), &mean, &sd, threads);
  ArgmaxEiResult out;
  out.index = 0;
  out.max_ei = expected_improvement(mean[0], sd[0], e_min);
  for (int i = 1; i < n; ++i) {
    double ei = expected_improvement(mean[i], sd[i], e_min);
    if (ei > out.max_ei) {
      out.max_ei = ei;
      out.index = i;
    }
  }
  if (out.max_ei == 0) {
    out.all_zero = true;
    out.index = first_unevaluated;
  }
  return out;
}

BoResult bo_run(const CandidateSet& set, EnergyOracle& oracle, EnergyLedger& ledger,
                const RunConfig& config, RngStream& rng,
                const std::vector<int>* seed_indices,
                const std::vector<double>* seed_energies, const GpModel* seed_model) {
  const int n = set.size();
  const int p = set.dim();
  if (n < 2) throw std::invalid_argument("bo_run: need at least two candidates");
  const int threads = resolve_threads(config.threads);

  BoResult res;
  std::vector<int> train_idx;
  std::vector<double> train_e;
  std::optional<GpModel> model;
  int fit_no = 0;

  auto fit_model = [&](bool warm) {
    Eigen::MatrixXd S = set.rows_matrix(train_idx);
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(
        train_e.data(), static_cast<Eigen::Index>(train_e.size()));
    GpFitOptions opts;
    opts.base = config.gp;
    opts.seed = mix_seed(rng.base_seed(), "bo-gp-" + std::to_string(fit_no));
    if (warm && model) opts.warm_start = model->params().lengthscales;
    model = GpModel::fit(S, e, opts);
    ++fit_no;
  };

  if (seed_indices != nullptr && !seed_indices->empty()) {
    if (seed_energies == nullptr || seed_energies->size() != seed_indices->size())
      throw std::invalid_argument("bo_run: seed indices/energies mismatch");
    train_idx = *seed_indices;
    train_e = *seed_energies;
    if (train_idx.size() < 2)
      throw std::invalid_argument("bo_run: need at least two seeded evaluations");
    if (seed_model != nullptr)
      model = *seed_model;
    else
      fit_model(false);
  } else {
    // Fresh initial design: the lowest-index entry anchors a space-filling
    // augmentation up to 10 p members.
    const long design_size = std::min<long>(10L * p, n);
    std::vector<int> design{0};
    if (design_size > 1) {
      std::vector<int> pool_idx;
      for (int i = 1; i < n; ++i) pool_idx.push_back(i);
      Eigen::MatrixXd existing = set.rows_matrix(design);
      Eigen::MatrixXd pool = set.rows_matrix(pool_idx);
      std::vector<int> picks =
          maxpro_augment(existing, pool, static_cast<int>(design_size - 1));
      for (int pick : picks)
        design.push_back(pool_idx[static_cast<std::size_t>(pick)]);
    }
    for (int idx : design) {
      double e = oracle.evaluate(set, idx);
      ledger.record(idx + 1, e, Phase::initial);
      train_idx.push_back(idx);
      train_e.push_back(e);
    }
    res.design_calls = static_cast<long long>(design.size());
    fit_model(false);
  }

  std::vector<char> is_eval(static_cast<std::size_t>(n), 0);
  for (int idx : train_idx) is_eval[static_cast<std::size_t>(idx)] = 1;
  double e_min = *std::min_element(train_e.begin(), train_e.end());

  const long long cap = n;
  while (true) {
    if (res.iterations >= cap) {
      res.stop = BoStopReason::cap;
      break;
    }
    // A fully evaluated set is the natural end of the acquisition budget,
    // not an error: there is nothing left to acquire.
    if (std::find(is_eval.begin(), is_eval.end(), 0) == is_eval.end()) {
      res.stop = BoStopReason::cap;
      break;
    }
    ArgmaxEiResult am = argmax_ei(*model, set, train_idx, e_min, threads);
    double rel = am.max_ei / std::max(std::abs(e_min), 1e-12);
    if (rel <= config.t_ei_factor) {
      res.stop = BoStopReason::converged;
      break;
    }
    if (is_eval[static_cast<std::size_t>(am.index)]) {
      res.stop = BoStopReason::duplicate;
      break;
    }
    double e = oracle.evaluate(set, am.index);
    ledger.record(am.index + 1, e, Phase::bo);
    ++res.iterations;
    train_idx.push_back(am.index);
    train_e.push_back(e);
    is_eval[static_cast<std::size_t>(am.index)] = 1;
    e_min = std::min(e_min, e);

    BoTraceRow row;
    row.iter = res.iterations;
    row.chosen_id = am.index + 1;
    row.max_ei = am.max_ei;
    row.rel_ei = rel;
    row.oracle_energy = e;
    row.best_so_far = e_min;
    res.trace.push_back(row);

    fit_model(true);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < train_e.size(); ++i)
    if (train_e[i] < train_e[best]) best = i;
  res.best_index = train_idx[best];
  res.best_energy = train_e[best];
  res.evaluated = std::move(train_idx);
  res.energies = std::move(train_e);
  return res;
}

}  // namespace exex
