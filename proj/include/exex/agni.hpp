#pragma once

#include <vector>

#include <Eigen/Core>

#include "exex/crystal.hpp"

namespace exex {

/// Parameters of the structural fingerprint: n_widths Gaussian widths laid
/// out geometrically from sigma_min to sigma_max (Angstrom) under a cosine
/// cutoff at r_cut. The fingerprint has 2*n_widths components: the scalar
/// channel S_k followed by the vector-channel magnitude V_k.
struct AgniParams {
  int n_widths = 16;
  double sigma_min = 0.25;
  double sigma_max = 8.0;
  double r_cut = 8.0;

  int dim() const { return 2 * n_widths; }
  std::vector<double> widths() const;
};

/// Cosine taper: 0.5*(cos(pi r / r_cut) + 1), defined for 0 <= r <= r_cut.
double cutoff_value(double r, double r_cut);

/// One neighbor of a central atom: displacement vector and its length.
struct Neighbor {
  int center;          // index of the central atom
  Eigen::Vector3d rij; // displacement from center to the neighbor image
  double r;            // |rij|, strictly inside the cutoff
};

/// All (center, neighbor-image) pairs with 0 < r < r_cut. The periodic
/// image block extent is derived from the cell's perpendicular widths so
/// the enumeration is guaranteed to cover the cutoff sphere.
std::vector<Neighbor> build_neighbor_list(const CrystalConfiguration& cfg,
                                          double r_cut);

/// Structural fingerprint of a cell: raw sums over all central atoms (no
/// per-atom normalization, so a doubled supercell doubles every S_k).
Eigen::VectorXd agni_fingerprint(const CrystalConfiguration& cfg,
                                 const AgniParams& params,
                                 long* neighbor_count = nullptr);

}  // namespace exex
