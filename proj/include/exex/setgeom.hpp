#pragma once

#include <vector>

#include <Eigen/Core>

#include "exex/types.hpp"

namespace exex {

/// Directional nearest-neighbor distances of one entry: for every feature
/// dimension, the distance to the closest other member strictly below
/// (minus) and strictly above (plus) along that coordinate. Members sitting
/// exactly on the splitting hyperplane belong to neither side. Empty
/// half-spaces carry +infinity and are excluded from the sparsity radius.
struct DirectionalRow {
  Eigen::ArrayXd minus;  // size p
  Eigen::ArrayXd plus;   // size p

  /// max over the non-empty half-spaces; -infinity when all are empty.
  double radius() const;
};

DirectionalRow directional_nn(const CandidateSet& set, int i);

/// Index of the most sparsely located member: the one whose directional
/// radius is largest (ties resolved to the lowest index).
int sparsest_index(const CandidateSet& set);

/// Incrementally maintained directional distances for every member.
/// Building from a set costs O(n^2 p); folding in one addition costs
/// O(n p). Matches directional_nn / sparsest_index exactly.
class DirectionalCache {
 public:
  explicit DirectionalCache(const CandidateSet& set);

  /// Update after set.add() appended entry new_index.
  void on_add(const CandidateSet& set, int new_index);

  int sparsest() const;
  double radius(int i) const { return radius_[static_cast<std::size_t>(i)]; }
  const DirectionalRow& row(int i) const {
    return rows_[static_cast<std::size_t>(i)];
  }
  /// Largest cached nearest-neighbor distance (from the owning set).
  int size() const { return static_cast<int>(rows_.size()); }

 private:
  std::vector<DirectionalRow> rows_;
  std::vector<double> radius_;
};

/// Largest nearest-neighbor distance over the set; the frozen neighborhood
/// radius used by boundary classification during adaptive expansion.
double max_nn_distance(const CandidateSet& set);

/// Principal-component projection fitted to the set (sample covariance,
/// eigenvectors sorted by descending eigenvalue). Sign convention: the
/// largest-magnitude entry of every loading column is positive.
struct PcaProjection {
  Eigen::VectorXd mean;                  // size p
  Eigen::MatrixXd loadings;              // p x k, orthonormal columns
  Eigen::VectorXd explained_fractions;   // size k, of total variance

  int k() const { return static_cast<int>(loadings.cols()); }
  Eigen::RowVectorXd project(const Fingerprint& x) const {
    return (x - mean).transpose() * loadings;
  }
  Eigen::MatrixXd project_rows(const Eigen::MatrixXd& pts) const {
    return (pts.rowwise() - mean.transpose()) * loadings;
  }
};

/// Fit the top-k principal components. Throws std::invalid_argument when
/// fewer than two points are given or k exceeds the achievable rank (the
/// message reports the achievable rank).
PcaProjection pca_fit(const Eigen::MatrixXd& points, int k);
PcaProjection pca_fit(const CandidateSet& set, int k);

/// Number of principal components with non-negligible variance.
int pca_achievable_rank(const Eigen::MatrixXd& points);

/// Fit min(kmax, achievable rank) components; throws only when no usable
/// component exists (all points identical).
PcaProjection pca_fit_up_to(const Eigen::MatrixXd& points, int kmax);
PcaProjection pca_fit_up_to(const CandidateSet& set, int kmax);

/// Interior/boundary test in an explicit coordinate matrix (row per
/// member): entry i is interior iff every one of the 2^k orthants anchored
/// at it contains another member within distance r. Coordinates equal to
/// the anchor's along any axis place a member in no orthant.
bool is_boundary_in_coords(const Eigen::MatrixXd& coords, int i, double r);

/// Boundary test for a set member, optionally in PCA coordinates.
bool is_boundary(const CandidateSet& set, int i, double r,
                 const PcaProjection* proj = nullptr);

}  // namespace exex
