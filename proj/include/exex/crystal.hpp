#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "exex/rng.hpp"

namespace exex {

/// A periodic crystal cell: three lattice row vectors (Angstrom) and
/// fractional atomic positions in [0, 1). Construction normalizes the
/// representation: fractional coordinates are wrapped and a left-handed
/// lattice is corrected to right-handed (rows b and c swapped together
/// with the matching fractional columns, which leaves every Cartesian
/// position unchanged).
struct CrystalConfiguration {
  Eigen::Matrix3d lattice;                       // rows are a, b, c
  Eigen::Matrix<double, Eigen::Dynamic, 3> frac; // one row per atom
  std::vector<std::string> species;

  int n_atoms() const { return static_cast<int>(frac.rows()); }

  /// Cartesian positions, one row per atom.
  Eigen::Matrix<double, Eigen::Dynamic, 3> cartesian() const {
    return frac * lattice;
  }
};

/// Signed scalar triple product of the lattice rows (no orientation fix).
double signed_volume(const Eigen::Matrix3d& lattice);

/// Validate and normalize a configuration (wrap + handedness fix).
/// Throws std::invalid_argument for a degenerate (coplanar) lattice,
/// naming the offending vectors, or mismatched species count.
CrystalConfiguration make_configuration(
    const Eigen::Matrix3d& lattice,
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& frac,
    std::vector<std::string> species);

/// Cell volume; positive for any constructed configuration.
double cell_volume(const CrystalConfiguration& cfg);

/// Minimum distance over all atom pairs including periodic self-images,
/// enumerating images over a +/-image_extent block per axis.
double min_pair_distance(const CrystalConfiguration& cfg, int image_extent = 2);

/// Random cell: volume uniform in v_ref*n_atoms*(1 +/- vol_jitter); lattice
/// directions uniform on the sphere with log-uniform lengths within a 3:1
/// aspect cap and all inter-vector angles in [30, 150] degrees, rescaled to
/// the drawn volume; atoms placed by rejection sampling until all pair
/// distances (periodic) exceed min_sep. Throws std::runtime_error when the
/// placement attempt cap is exhausted.
CrystalConfiguration random_structure(double v_ref, int n_atoms, double min_sep,
                                      double vol_jitter, RngStream& rng,
                                      long attempt_cap = 10000,
                                      const std::string& species = "Al");

/// Displace every atom by an independent uniform draw in the Cartesian ball
/// of radius max_disp (component-wise uniform proposals, accepted when the
/// norm is within the radius); lattice unchanged, fractions re-wrapped.
CrystalConfiguration perturb_structure(const CrystalConfiguration& cfg,
                                       double max_disp, RngStream& rng);

/// Conventional-cell face-centered-cubic block of nx*ny*nz cells
/// (4 atoms per cell) with cubic lattice constant a.
CrystalConfiguration make_fcc(double a, int nx = 1, int ny = 1, int nz = 1,
                              const std::string& species = "Al");

/// Extended-XYZ serialization. Line 1 is the atom count, line 2 is
/// Lattice="ax ay az bx by bz cx cy cz", then one "<species> <x> <y> <z>"
/// Cartesian line per atom. Numbers are printed with 12 significant digits
/// and the reader/writer pair round-trips that text exactly.
std::string to_extended_xyz(const CrystalConfiguration& cfg);
CrystalConfiguration read_extended_xyz(std::istream& in);
CrystalConfiguration read_extended_xyz_string(const std::string& text);

/// Multi-frame helpers: frames concatenated in order.
std::string to_extended_xyz_frames(const std::vector<CrystalConfiguration>& v);
std::vector<CrystalConfiguration> read_extended_xyz_frames(std::istream& in);

}  // namespace exex
