#include "exex/designs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace exex {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Design state for the swap climb. Keeps the pairwise squared-distance
/// matrix plus per-row minima so one coordinate swap costs O(n) amortized.
struct ClimbState {
  Eigen::MatrixXd x;      // n x p
  Eigen::MatrixXd dist2;  // pairwise squared distances, +inf diagonal
  Eigen::VectorXd rowmin;
  std::vector<Eigen::Index> rowarg;

  void recompute_row(Eigen::Index i) {
    const Eigen::Index n = x.rows();
    double best = kInf;
    Eigen::Index arg = i;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i && dist2(i, j) < best) {
        best = dist2(i, j);
        arg = j;
      }
    rowmin[i] = best;
    rowarg[static_cast<std::size_t>(i)] = arg;
  }

  void rebuild() {
    const Eigen::Index n = x.rows();
    dist2.resize(n, n);
    rowmin.resize(n);
    rowarg.assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      dist2(i, i) = kInf;
      for (Eigen::Index j = i + 1; j < n; ++j)
        dist2(i, j) = dist2(j, i) = (x.row(i) - x.row(j)).squaredNorm();
    }
    for (Eigen::Index i = 0; i < n; ++i) recompute_row(i);
  }

  double min_dist2() const { return rowmin.minCoeff(); }

  /// Global minimum pair (lowest row index first).
  std::pair<Eigen::Index, Eigen::Index> min_pair() const {
    Eigen::Index a = 0;
    rowmin.minCoeff(&a);
    return {a, rowarg[static_cast<std::size_t>(a)]};
  }

  /// Swap coordinate k between rows a and b, updating all caches.
  void apply_swap(Eigen::Index a, Eigen::Index b, Eigen::Index k) {
    std::swap(x(a, k), x(b, k));
    const Eigen::Index n = x.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != a) dist2(a, j) = dist2(j, a) = (x.row(a) - x.row(j)).squaredNorm();
      if (j != b) dist2(b, j) = dist2(j, b) = (x.row(b) - x.row(j)).squaredNorm();
    }
    recompute_row(a);
    recompute_row(b);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == a || j == b) continue;
      Eigen::Index arg = rowarg[static_cast<std::size_t>(j)];
      if (arg == a || arg == b) {
        // The previous nearest neighbor moved; its distance may have grown.
        recompute_row(j);
      } else {
        if (dist2(j, a) < rowmin[j]) {
          rowmin[j] = dist2(j, a);
          rowarg[static_cast<std::size_t>(j)] = a;
        }
        if (dist2(j, b) < rowmin[j]) {
          rowmin[j] = dist2(j, b);
          rowarg[static_cast<std::size_t>(j)] = b;
        }
      }
    }
  }
};

}  // namespace

Box Box::cube(int p, double lo, double hi) {
  Box b;
  b.low = Eigen::VectorXd::Constant(p, lo);
  b.high = Eigen::VectorXd::Constant(p, hi);
  return b;
}

bool Box::contains(const Eigen::VectorXd& x) const {
  for (int k = 0; k < dim(); ++k)
    if (x[k] < low[k] || x[k] > high[k]) return false;
  return true;
}

Eigen::MatrixXd maximin_lhd(int n, const Box& bounds, int restarts,
                            RngStream& rng, std::vector<double>* climb_trace) {
  const int p = bounds.dim();
  if (n < 1) throw std::invalid_argument("maximin_lhd: n must be positive");
  if (p < 1) throw std::invalid_argument("maximin_lhd: empty bounds");
  if (restarts < 1)
    throw std::invalid_argument("maximin_lhd: restarts must be >= 1");
  for (int k = 0; k < p; ++k)
    if (!(bounds.high[k] > bounds.low[k]))
      throw std::invalid_argument("maximin_lhd: degenerate bounds");

  Eigen::MatrixXd best;
  double best_obj = -kInf;
  std::vector<double> best_trace;

  for (int rs = 0; rs < restarts; ++rs) {
    ClimbState st;
    st.x.resize(n, p);
    for (int k = 0; k < p; ++k) {
      std::vector<int> perm = rng.permutation(n);
      double width = (bounds.high[k] - bounds.low[k]) / n;
      for (int i = 0; i < n; ++i)
        st.x(i, k) =
            bounds.low[k] + (perm[static_cast<std::size_t>(i)] + rng.uniform01()) * width;
    }
    st.rebuild();
    std::vector<double> trace;
    trace.push_back(std::sqrt(st.min_dist2()));

    if (n > 1) {
      const int max_sweeps = 60;
      for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        // Work on a row of the current closest pair; try swapping each of
        // its coordinates with every other row, first improvement wins.
        auto [a, b] = st.min_pair();
        bool improved = false;
        for (Eigen::Index k = 0; k < p && !improved; ++k) {
          for (Eigen::Index c = 0; c < n && !improved; ++c) {
            if (c == a) continue;
            double before = st.min_dist2();
            st.apply_swap(a, c, k);
            if (st.min_dist2() > before) {
              improved = true;
              trace.push_back(std::sqrt(st.min_dist2()));
            } else {
              st.apply_swap(a, c, k);  // undo
            }
          }
        }
        if (!improved) {
          // Also give the partner row a chance before giving up.
          for (Eigen::Index k = 0; k < p && !improved; ++k) {
            for (Eigen::Index c = 0; c < n && !improved; ++c) {
              if (c == b) continue;
              double before = st.min_dist2();
              st.apply_swap(b, c, k);
              if (st.min_dist2() > before) {
                improved = true;
                trace.push_back(std::sqrt(st.min_dist2()));
              } else {
                st.apply_swap(b, c, k);
              }
            }
          }
        }
        if (!improved) break;
      }
    }

    double obj = st.min_dist2();
    if (obj > best_obj) {
      best_obj = obj;
      best = st.x;
      best_trace = trace;
    }
  }
  if (climb_trace) *climb_trace = best_trace;
  return best;
}

double maxpro_criterion(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index p = points.cols();
  if (n < 2)
    throw std::invalid_argument("maxpro_criterion: need at least two points");
  double sum = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double prod = 1;
      for (Eigen::Index k = 0; k < p; ++k) {
        double d = points(i, k) - points(j, k);
        double d2 = d * d;
        if (d2 == 0) return kInf;
        prod *= d2;
      }
      sum += 1.0 / prod;
    }
  double avg = 2.0 * sum / (static_cast<double>(n) * (static_cast<double>(n) - 1));
  return std::pow(avg, 1.0 / static_cast<double>(p));
}

std::vector<int> maxpro_augment(const Eigen::MatrixXd& existing,
                                const Eigen::MatrixXd& pool, int k) {
  const Eigen::Index np = pool.rows();
  const Eigen::Index p = pool.cols();
  if (k < 0 || k > np)
    throw std::invalid_argument("maxpro_augment: k out of range");
  if (existing.rows() > 0 && existing.cols() != p)
    throw std::invalid_argument("maxpro_augment: dimension mismatch");

  // Scale everything by the pool's bounding box (flat dimensions pass
  // through unscaled).
  Eigen::VectorXd lo = pool.colwise().minCoeff();
  Eigen::VectorXd hi = pool.colwise().maxCoeff();
  Eigen::VectorXd width(p);
  for (Eigen::Index c = 0; c < p; ++c) {
    width[c] = hi[c] - lo[c];
    if (width[c] <= 0) width[c] = 1.0;
  }
  auto scaled = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index c = 0; c < p; ++c)
      out.col(c) = (out.col(c).array() - lo[c]) / width[c];
    return out;
  };
  Eigen::MatrixXd ex = scaled(existing);
  Eigen::MatrixXd pl = scaled(pool);

  // Greedy selection. With a fixed chosen-set size every candidate shares
  // the same pair-count normalizer, so minimizing the criterion is
  // minimizing the candidate's added reciprocal-product sum.
  std::vector<char> used(static_cast<std::size_t>(np), 0);
  std::vector<Eigen::RowVectorXd> chosen;
  chosen.reserve(static_cast<std::size_t>(existing.rows()) +
                 static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < ex.rows(); ++i) chosen.push_back(ex.row(i));

  // Running contribution of each candidate against the chosen set.
  std::vector<double> delta(static_cast<std::size_t>(np), 0.0);
  auto pair_term = [&](const Eigen::RowVectorXd& a,
                       const Eigen::RowVectorXd& b) {
    double prod = 1;
    for (Eigen::Index c = 0; c < p; ++c) {
      double d = a[c] - b[c];
      double d2 = d * d;
      if (d2 == 0) return kInf;
      prod *= d2;
    }
    return 1.0 / prod;
  };
  for (Eigen::Index cand = 0; cand < np; ++cand)
    for (const auto& row : chosen) {
      delta[static_cast<std::size_t>(cand)] += pair_term(pl.row(cand), row);
      if (std::isinf(delta[static_cast<std::size_t>(cand)])) break;
    }

  std::vector<int> picks;
  picks.reserve(static_cast<std::size_t>(k));
  for (int step = 0; step < k; ++step) {
    int arg = -1;
    double best = kInf;
    for (Eigen::Index cand = 0; cand < np; ++cand) {
      if (used[static_cast<std::size_t>(cand)]) continue;
      double v = delta[static_cast<std::size_t>(cand)];
      if (arg < 0 || v < best) {
        arg = static_cast<int>(cand);
        best = v;
      }
    }
    used[static_cast<std::size_t>(arg)] = 1;
    picks.push_back(arg);
    chosen.push_back(pl.row(arg));
    for (Eigen::Index cand = 0; cand < np; ++cand) {
      if (used[static_cast<std::size_t>(cand)]) continue;
      double& dv = delta[static_cast<std::size_t>(cand)];
      if (!std::isinf(dv)) dv += pair_term(pl.row(cand), chosen.back());
    }
  }
  return picks;
}

}  // namespace exex
