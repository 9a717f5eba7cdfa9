#include "exex/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "exex/format.hpp"

namespace exex {

double sphere_value(const Eigen::VectorXd& x) { return x.squaredNorm(); }

double schwefel_value(const Eigen::VectorXd& x) {
  double sum = 0;
  for (Eigen::Index k = 0; k < x.size(); ++k)
    sum += x[k] * std::sin(std::sqrt(std::abs(x[k])));
  return 418.9829 * static_cast<double>(x.size()) - sum;
}

double branin_value(const Eigen::VectorXd& x) {
  if (x.size() != 2) throw std::invalid_argument("branin_value: requires a 2-vector");
  const double pi = std::acos(-1.0);
  const double a = 1.0;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double r = 6.0;
  const double s = 10.0;
  const double t = 1.0 / (8.0 * pi);
  double u = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return a * u * u + s * (1.0 - t) * std::cos(x[0]) + s;
}

double schwefel_minimizer_coordinate() { return 420.9687; }

Box sphere_domain(int p) { return Box::cube(p, -5.12, 5.12); }
Box sphere_start_box(int p) { return Box::cube(p, 1.5, 4.0); }
Box schwefel_domain(int p) { return Box::cube(p, -500.0, 500.0); }
Box schwefel_start_box(int p) { return Box::cube(p, 250.0, 400.0); }

Box branin_domain() {
  Box box;
  box.low.resize(2);
  box.high.resize(2);
  box.low << -5.0, 0.0;
  box.high << 10.0, 15.0;
  return box;
}

ProblemKind parse_problem(const std::string& name) {
  if (name == "sphere") return ProblemKind::sphere;
  if (name == "schwefel") return ProblemKind::schwefel;
  if (name == "branin") return ProblemKind::branin;
  if (name == "lj_crystal") return ProblemKind::lj_crystal;
  throw std::invalid_argument("unknown problem: '" + name + "'");
}

const char* problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::sphere: return "sphere";
    case ProblemKind::schwefel: return "schwefel";
    case ProblemKind::branin: return "branin";
    case ProblemKind::lj_crystal: return "lj_crystal";
  }
  throw std::logic_error("problem_name: bad kind");
}

std::function<double(const Eigen::VectorXd&)> problem_function(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::sphere: return sphere_value;
    case ProblemKind::schwefel: return schwefel_value;
    case ProblemKind::branin: return branin_value;
    case ProblemKind::lj_crystal: break;
  }
  throw std::invalid_argument("problem_function: lj_crystal has no analytic form");
}

Box problem_start_box(ProblemKind kind, int p) {
  switch (kind) {
    case ProblemKind::sphere: return sphere_start_box(p);
    case ProblemKind::schwefel: return schwefel_start_box(p);
    case ProblemKind::branin:
      if (p != 2) throw std::invalid_argument("branin requires p = 2");
      return branin_domain();
    case ProblemKind::lj_crystal: break;
  }
  throw std::invalid_argument("problem_start_box: lj_crystal has no box");
}

double lj_energy(const CrystalConfiguration& cfg, const LjParams& params) {
  if (!(params.epsilon > 0) || !(params.sigma > 0) || !(params.r_cut > 0))
    throw std::invalid_argument("lj_energy: parameters must be positive");
  const double overlap = 0.1 * params.sigma;
  const double sr_cut6 = std::pow(params.sigma / params.r_cut, 6);
  const double shift = 4.0 * params.epsilon * (sr_cut6 * sr_cut6 - sr_cut6);
  double total = 0;
  for (const Neighbor& nb : build_neighbor_list(cfg, params.r_cut)) {
    if (nb.r < overlap)
      throw std::domain_error("lj_energy: pair distance " + std::to_string(nb.r) +
                              " below overlap limit " + std::to_string(overlap));
    const double sr6 = std::pow(params.sigma / nb.r, 6);
    total += 0.5 * (4.0 * params.epsilon * (sr6 * sr6 - sr6) - shift);
  }
  return total;
}

double LjOracle::energy_of(const CandidateSet& set, int index) {
  const CrystalConfiguration* cfg = set.config(index);
  if (cfg == nullptr)
    throw std::logic_error("LjOracle: entry " + std::to_string(index) +
                           " carries no structure");
  return lj_energy(*cfg, params_);
}

Eigen::VectorXd mvn_perturb(const Eigen::VectorXd& x, const Eigen::VectorXd& diag_sd,
                            RngStream& rng) {
  if (diag_sd.size() != x.size())
    throw std::invalid_argument("mvn_perturb: sd dimension mismatch");
  Eigen::VectorXd y(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!(diag_sd[k] >= 0))
      throw std::invalid_argument("mvn_perturb: sd must be non-negative");
    y[k] = x[k] + diag_sd[k] * rng.normal();
  }
  return y;
}

MvnPerturber::MvnPerturber(Eigen::VectorXd diag_sd) : diag_sd_(std::move(diag_sd)) {
  for (Eigen::Index k = 0; k < diag_sd_.size(); ++k)
    if (!(diag_sd_[k] > 0))
      throw std::invalid_argument("MvnPerturber: sd must be positive");
}

MvnPerturber MvnPerturber::from_initial_set(const CandidateSet& set) {
  if (set.size() < 2)
    throw std::invalid_argument(
        "MvnPerturber: need at least two initial points to size the step");
  double mean_nn = 0;
  for (double d : set.nn_dists()) mean_nn += d;
  mean_nn /= set.size();
  Eigen::VectorXd sd =
      Eigen::VectorXd::Constant(set.dim(), std::sqrt(mean_nn));
  return MvnPerturber(std::move(sd));
}

ProposedPoint MvnPerturber::propose(const CandidateSet& set, int index, RngStream& rng) {
  ProposedPoint out;
  out.fp = mvn_perturb(set.point(index), diag_sd_, rng);
  return out;
}

ProposedPoint CrystalPerturber::propose(const CandidateSet& set, int index,
                                        RngStream& rng) {
  const CrystalConfiguration* cfg = set.config(index);
  if (cfg == nullptr)
    throw std::logic_error("CrystalPerturber: entry " + std::to_string(index) +
                           " carries no structure");
  ProposedPoint out;
  CrystalConfiguration moved = perturb_structure(*cfg, max_disp_, rng);
  if (min_pair_floor_ > 0.0) {
    constexpr int kRedrawCap = 1000;
    int redraws = 0;
    while (min_pair_distance(moved) < min_pair_floor_) {
      if (++redraws > kRedrawCap) {
        throw NonConvergence(
            "CrystalPerturber: could not draw a proposal with pair "
            "distances above " +
            fmt_g12(min_pair_floor_) + " from entry " + std::to_string(index));
      }
      moved = perturb_structure(*cfg, max_disp_, rng);
    }
  }
  out.fp = agni_fingerprint(moved, params_);
  out.cfg = std::move(moved);
  return out;
}

}  // namespace exex
