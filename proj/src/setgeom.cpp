#include "exex/setgeom.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace exex {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double DirectionalRow::radius() const {
  double r = -kInf;
  for (Eigen::Index k = 0; k < minus.size(); ++k) {
    if (std::isfinite(minus[k])) r = std::max(r, minus[k]);
    if (std::isfinite(plus[k])) r = std::max(r, plus[k]);
  }
  return r;
}

DirectionalRow directional_nn(const CandidateSet& set, int i) {
  const int p = set.dim();
  const int n = set.size();
  DirectionalRow row;
  row.minus = Eigen::ArrayXd::Constant(p, kInf);
  row.plus = Eigen::ArrayXd::Constant(p, kInf);
  const Fingerprint& xi = set.point(i);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const Fingerprint& xj = set.point(j);
    double d = CandidateSet::distance(xi, xj);
    for (int k = 0; k < p; ++k) {
      if (xj[k] < xi[k]) {
        if (d < row.minus[k]) row.minus[k] = d;
      } else if (xj[k] > xi[k]) {
        if (d < row.plus[k]) row.plus[k] = d;
      }
      // Equal coordinates: the member lies on the splitting hyperplane and
      // counts for neither side.
    }
  }
  return row;
}

int sparsest_index(const CandidateSet& set) {
  if (set.size() < 2)
    throw std::invalid_argument("sparsest_index: need at least two members");
  int best = 0;
  double best_r = -kInf;
  for (int i = 0; i < set.size(); ++i) {
    double r = directional_nn(set, i).radius();
    if (r > best_r) {
      best_r = r;
      best = i;
    }
  }
  return best;
}

DirectionalCache::DirectionalCache(const CandidateSet& set) {
  rows_.reserve(static_cast<std::size_t>(set.size()));
  radius_.reserve(static_cast<std::size_t>(set.size()));
  for (int i = 0; i < set.size(); ++i) {
    rows_.push_back(directional_nn(set, i));
    radius_.push_back(rows_.back().radius());
  }
}

void DirectionalCache::on_add(const CandidateSet& set, int new_index) {
  const int p = set.dim();
  const Fingerprint& xq = set.point(new_index);
  for (int i = 0; i < static_cast<int>(rows_.size()); ++i) {
    const Fingerprint& xi = set.point(i);
    double d = CandidateSet::distance(xi, xq);
    DirectionalRow& row = rows_[static_cast<std::size_t>(i)];
    bool touched = false;
    for (int k = 0; k < p; ++k) {
      if (xq[k] < xi[k]) {
        if (d < row.minus[k]) {
          row.minus[k] = d;
          touched = true;
        }
      } else if (xq[k] > xi[k]) {
        if (d < row.plus[k]) {
          row.plus[k] = d;
          touched = true;
        }
      }
    }
    if (touched) radius_[static_cast<std::size_t>(i)] = row.radius();
  }
  rows_.push_back(directional_nn(set, new_index));
  radius_.push_back(rows_.back().radius());
}

int DirectionalCache::sparsest() const {
  if (rows_.size() < 2)
    throw std::logic_error("DirectionalCache: need at least two members");
  int best = 0;
  double best_r = -kInf;
  for (int i = 0; i < static_cast<int>(rows_.size()); ++i) {
    if (radius_[static_cast<std::size_t>(i)] > best_r) {
      best_r = radius_[static_cast<std::size_t>(i)];
      best = i;
    }
  }
  return best;
}

double max_nn_distance(const CandidateSet& set) {
  if (set.size() < 2)
    throw std::invalid_argument("max_nn_distance: need at least two members");
  double r = 0;
  for (double d : set.nn_dists()) r = std::max(r, d);
  return r;
}

PcaProjection pca_fit(const Eigen::MatrixXd& points, int k) {
  const Eigen::Index n = points.rows();
  const Eigen::Index p = points.cols();
  if (k < 1) throw std::invalid_argument("pca_fit: k must be positive");
  if (n <= k)
    throw std::invalid_argument("pca_fit: need more points than components");

  Eigen::VectorXd mean = points.colwise().mean();
  Eigen::MatrixXd centered = points.rowwise() - mean.transpose();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("pca_fit: eigendecomposition failed");
  // Eigen returns ascending eigenvalues; view them in descending order.
  Eigen::VectorXd evals = solver.eigenvalues().reverse();
  Eigen::MatrixXd evecs = solver.eigenvectors().rowwise().reverse();

  double total = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    total += std::max(evals[i], 0.0);
  double lead = std::max(evals[0], 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    if (evals[i] > lead * 1e-12 && evals[i] > 0) ++rank;
  if (k > rank) {
    std::ostringstream msg;
    msg << "pca_fit: requested " << k
        << " components but the data rank is only " << rank;
    throw std::invalid_argument(msg.str());
  }

  PcaProjection proj;
  proj.mean = mean;
  proj.loadings = evecs.leftCols(k);
  proj.explained_fractions = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i)
    proj.explained_fractions[i] =
        total > 0 ? std::max(evals[i], 0.0) / total : 0.0;

  // Sign convention: largest-magnitude entry of each column positive.
  for (int c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    proj.loadings.col(c).cwiseAbs().maxCoeff(&arg);
    if (proj.loadings(arg, c) < 0) proj.loadings.col(c) *= -1.0;
  }
  (void)p;
  return proj;
}

PcaProjection pca_fit(const CandidateSet& set, int k) {
  return pca_fit(set.as_matrix(), k);
}

int pca_achievable_rank(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) return 0;
  Eigen::VectorXd mean = points.colwise().mean();
  Eigen::MatrixXd centered = points.rowwise() - mean.transpose();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) return 0;
  Eigen::VectorXd evals = solver.eigenvalues();
  double lead = std::max(evals.maxCoeff(), 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    if (evals[i] > lead * 1e-12 && evals[i] > 0) ++rank;
  return rank;
}

PcaProjection pca_fit_up_to(const Eigen::MatrixXd& points, int kmax) {
  int rank = pca_achievable_rank(points);
  long k = std::min(static_cast<long>(kmax),
                    std::min(static_cast<long>(rank), static_cast<long>(points.rows()) - 1));
  if (k < 1)
    throw std::invalid_argument("pca_fit_up_to: no usable principal component");
  return pca_fit(points, static_cast<int>(k));
}

PcaProjection pca_fit_up_to(const CandidateSet& set, int kmax) {
  return pca_fit_up_to(set.as_matrix(), kmax);
}

bool is_boundary_in_coords(const Eigen::MatrixXd& coords, int i, double r) {
  const Eigen::Index n = coords.rows();
  const int k = static_cast<int>(coords.cols());
  if (k > 30)
    throw std::invalid_argument("is_boundary_in_coords: too many dimensions");
  const unsigned total = 1u << k;
  std::vector<char> seen(total, 0);
  unsigned found = 0;
  Eigen::RowVectorXd anchor = coords.row(i);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) continue;
    Eigen::RowVectorXd d = coords.row(j) - anchor;
    if (d.norm() > r) continue;
    unsigned mask = 0;
    bool on_plane = false;
    for (int c = 0; c < k; ++c) {
      if (d[c] > 0)
        mask |= (1u << c);
      else if (d[c] == 0) {
        on_plane = true;
        break;
      }
    }
    if (on_plane) continue;
    if (!seen[mask]) {
      seen[mask] = 1;
      if (++found == total) return false;  // all orthants occupied: interior
    }
  }
  return true;
}

bool is_boundary(const CandidateSet& set, int i, double r,
                 const PcaProjection* proj) {
  Eigen::MatrixXd coords =
      proj ? proj->project_rows(set.as_matrix()) : set.as_matrix();
  return is_boundary_in_coords(coords, i, r);
}

}  // namespace exex
