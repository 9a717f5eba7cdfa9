#pragma once

#include <vector>

#include <Eigen/Core>

#include "exex/rng.hpp"

namespace exex {

/// Axis-aligned box, one (low, high) pair per dimension.
struct Box {
  Eigen::VectorXd low;
  Eigen::VectorXd high;

  int dim() const { return static_cast<int>(low.size()); }
  static Box cube(int p, double lo, double hi);
  bool contains(const Eigen::VectorXd& x) const;
};

/// Maximin Latin hypercube design: best of `restarts` random Latin
/// hypercubes (uniform jitter within strata), each improved by coordinate
/// swaps between rows that preserve the Latin structure and increase the
/// minimum pairwise distance. Optionally records the objective value after
/// every accepted swap of the winning restart.
Eigen::MatrixXd maximin_lhd(int n, const Box& bounds, int restarts,
                            RngStream& rng,
                            std::vector<double>* climb_trace = nullptr);

/// Space-filling criterion: the p-th root of the average over point pairs
/// of the reciprocal product of squared coordinate differences. Lower is
/// better; +infinity when any pair shares a coordinate.
double maxpro_criterion(const Eigen::MatrixXd& points);

/// Greedily append k pool rows to the existing design, minimizing the
/// criterion in coordinates min-max scaled by the pool's bounding box.
/// Returns the chosen pool row indices in pick order (ties to lowest index).
std::vector<int> maxpro_augment(const Eigen::MatrixXd& existing,
                                const Eigen::MatrixXd& pool, int k);

}  // namespace exex
