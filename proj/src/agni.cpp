#include "exex/agni.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace exex {

std::vector<double> AgniParams::widths() const {
  if (n_widths < 1)
    throw std::invalid_argument("AgniParams: n_widths must be positive");
  if (!(sigma_min > 0) || !(sigma_max >= sigma_min))
    throw std::invalid_argument("AgniParams: need 0 < sigma_min <= sigma_max");
  std::vector<double> w(static_cast<std::size_t>(n_widths));
  if (n_widths == 1) {
    w[0] = sigma_min;
    return w;
  }
  double ratio = sigma_max / sigma_min;
  for (int k = 0; k < n_widths; ++k)
    w[static_cast<std::size_t>(k)] =
        sigma_min * std::pow(ratio, static_cast<double>(k) / (n_widths - 1));
  return w;
}

double cutoff_value(double r, double r_cut) {
  if (!(r_cut > 0))
    throw std::invalid_argument("cutoff_value: r_cut must be positive");
  if (r < 0 || r > r_cut)
    throw std::invalid_argument("cutoff_value: r outside [0, r_cut]");
  return 0.5 * (std::cos(std::numbers::pi * r / r_cut) + 1.0);
}

std::vector<Neighbor> build_neighbor_list(const CrystalConfiguration& cfg,
                                          double r_cut) {
  if (!(r_cut > 0))
    throw std::invalid_argument("build_neighbor_list: r_cut must be positive");
  const Eigen::Matrix3d& L = cfg.lattice;
  double volume = signed_volume(L);
  if (!(volume > 0))
    throw std::invalid_argument("build_neighbor_list: cell not normalized");

  // Perpendicular width along each axis: volume / area of the opposite face.
  // ceil(r_cut / width) images per direction guarantee the cutoff sphere is
  // covered.
  int ext[3];
  for (int a = 0; a < 3; ++a) {
    Eigen::RowVector3d u = L.row((a + 1) % 3);
    Eigen::RowVector3d v = L.row((a + 2) % 3);
    double area = u.cross(v).norm();
    double width = volume / area;
    ext[a] = static_cast<int>(std::ceil(r_cut / width));
  }

  const int n = cfg.n_atoms();
  Eigen::Matrix<double, Eigen::Dynamic, 3> cart = cfg.cartesian();
  std::vector<Neighbor> list;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int si = -ext[0]; si <= ext[0]; ++si)
        for (int sj = -ext[1]; sj <= ext[1]; ++sj)
          for (int sk = -ext[2]; sk <= ext[2]; ++sk) {
            if (i == j && si == 0 && sj == 0 && sk == 0) continue;
            Eigen::RowVector3d d = cart.row(j) + si * L.row(0) +
                                   sj * L.row(1) + sk * L.row(2) - cart.row(i);
            double r = d.norm();
            if (r > 0 && r < r_cut)
              list.push_back(Neighbor{i, d.transpose(), r});
          }
    }
  }
  return list;
}

Eigen::VectorXd agni_fingerprint(const CrystalConfiguration& cfg,
                                 const AgniParams& params,
                                 long* neighbor_count) {
  const std::vector<double> sigmas = params.widths();
  const std::vector<Neighbor> neighbors = build_neighbor_list(cfg, params.r_cut);
  if (neighbor_count) *neighbor_count = static_cast<long>(neighbors.size());

  const int nw = params.n_widths;
  Eigen::VectorXd fp = Eigen::VectorXd::Zero(2 * nw);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  for (int k = 0; k < nw; ++k) {
    const double sigma = sigmas[static_cast<std::size_t>(k)];
    double s = 0.0;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (const Neighbor& nb : neighbors) {
      double g = std::exp(-nb.r * nb.r / (2.0 * sigma * sigma)) *
                 inv_sqrt_2pi / sigma;
      double w = g * cutoff_value(nb.r, params.r_cut);
      s += w;
      v += (nb.rij / nb.r) * w;
    }
    fp[k] = s;
    fp[nw + k] = v.norm();
  }
  return fp;
}

}  // namespace exex
