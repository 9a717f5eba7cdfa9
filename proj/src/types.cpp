#include "exex/types.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace exex {

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::initial: return "initial";
    case Phase::adaptive: return "adaptive";
    case Phase::bo: return "bo";
  }
  return "unknown";
}

CandidateSet::CandidateSet(int dim) : dim_(dim) {
  if (dim < 1)
    throw std::invalid_argument("CandidateSet: dimension must be positive");
}

std::size_t CandidateSet::check(int i) const {
  if (i < 0 || i >= size())
    throw std::out_of_range("CandidateSet: index " + std::to_string(i) +
                            " out of range");
  return static_cast<std::size_t>(i);
}

void CandidateSet::validate(const Fingerprint& fp) const {
  if (fp.size() != dim_) {
    std::ostringstream msg;
    msg << "CandidateSet: fingerprint dimension " << fp.size()
        << " does not match set dimension " << dim_;
    throw std::invalid_argument(msg.str());
  }
  if (!fp.allFinite())
    throw std::invalid_argument(
        "CandidateSet: fingerprint has non-finite coordinates");
}

double CandidateSet::distance(const Fingerprint& a, const Fingerprint& b) {
  return (a - b).norm();
}

double CandidateSet::distance(int i, int j) const {
  return distance(points_[check(i)], points_[check(j)]);
}

int CandidateSet::push(const Fingerprint& fp) {
  validate(fp);
  const int n = size();
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double d = distance(fp, points_[static_cast<std::size_t>(j)]);
    if (d == 0.0 && fp == points_[static_cast<std::size_t>(j)]) {
      throw std::invalid_argument(
          "CandidateSet: exact duplicate of entry " + std::to_string(j));
    }
    best = std::min(best, d);
  }
  points_.push_back(fp);
  nn_dist_.push_back(best);
  // Fold the newcomer into existing caches.
  for (int j = 0; j < n; ++j) {
    double d = distance(points_.back(), points_[static_cast<std::size_t>(j)]);
    if (d < nn_dist_[static_cast<std::size_t>(j)])
      nn_dist_[static_cast<std::size_t>(j)] = d;
  }
  return n;
}

int CandidateSet::add(const Fingerprint& fp) {
  int idx = push(fp);
  configs_.emplace_back(std::nullopt);
  return idx;
}

int CandidateSet::add(const Fingerprint& fp, const CrystalConfiguration& cfg) {
  int idx = push(fp);
  configs_.emplace_back(cfg);
  return idx;
}

const CrystalConfiguration* CandidateSet::config(int i) const {
  const auto& c = configs_[check(i)];
  return c ? &*c : nullptr;
}

double CandidateSet::nearest_distance(const Fingerprint& fp) const {
  validate(fp);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : points_) best = std::min(best, distance(fp, q));
  return best;
}

Eigen::MatrixXd CandidateSet::as_matrix() const {
  Eigen::MatrixXd m(size(), dim_);
  for (int i = 0; i < size(); ++i)
    m.row(i) = points_[static_cast<std::size_t>(i)].transpose();
  return m;
}

Eigen::MatrixXd CandidateSet::rows_matrix(const std::vector<int>& indices) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(indices.size()), dim_);
  for (std::size_t r = 0; r < indices.size(); ++r)
    m.row(static_cast<Eigen::Index>(r)) = points_[check(indices[r])].transpose();
  return m;
}

void EnergyLedger::record(int fingerprint_id, double energy, Phase phase) {
  if (!std::isfinite(energy)) {
    std::ostringstream msg;
    msg << "EnergyLedger: non-finite energy for fingerprint "
        << fingerprint_id;
    throw std::invalid_argument(msg.str());
  }
  LedgerRow row;
  row.ordinal = static_cast<long>(rows_.size()) + 1;
  row.phase = phase;
  row.fingerprint_id = fingerprint_id;
  row.energy = energy;
  row.best_so_far = rows_.empty() ? energy : std::min(rows_.back().best_so_far, energy);
  rows_.push_back(row);
}

double EnergyLedger::best() const {
  if (rows_.empty()) throw std::logic_error("EnergyLedger: no records");
  return rows_.back().best_so_far;
}

int EnergyLedger::best_fingerprint() const {
  if (rows_.empty()) throw std::logic_error("EnergyLedger: no records");
  double best = rows_.back().best_so_far;
  for (const auto& r : rows_)
    if (r.energy == best) return r.fingerprint_id;
  return rows_.back().fingerprint_id;
}

long EnergyLedger::count(Phase phase) const {
  long n = 0;
  for (const auto& r : rows_)
    if (r.phase == phase) ++n;
  return n;
}

double EnergyOracle::evaluate(const CandidateSet& set, int index) {
  double e = energy_of(set, index);
  ++calls_;
  if (!std::isfinite(e)) {
    std::ostringstream msg;
    msg << "EnergyOracle: non-finite energy at fingerprint " << index;
    throw std::runtime_error(msg.str());
  }
  return e;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  threads = std::min<long>(resolve_threads(threads), n);
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    long lo = n * t / threads;
    long hi = n * (t + 1) / threads;
    pool.emplace_back([&, lo, hi] {
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace exex
