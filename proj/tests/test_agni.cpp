#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Geometry>

#include "exex/agni.hpp"
#include "exex/crystal.hpp"
#include "exex/rng.hpp"

using exex::AgniParams;
using exex::CrystalConfiguration;

namespace {

Eigen::Matrix3d cubic(double a) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 0) = a;
  m(1, 1) = a;
  m(2, 2) = a;
  return m;
}

CrystalConfiguration dimer(double d, double box) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> f(2, 3);
  f << 0, 0, 0, d / box, 0, 0;
  return exex::make_configuration(cubic(box), f, {"Al", "Al"});
}

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1.0, a.norm());
}

}  // namespace

TEST_CASE("gaussian widths are laid out geometrically") {
  AgniParams p;  // 16 widths from 0.25 to 8
  std::vector<double> w = p.widths();
  REQUIRE(w.size() == 16);
  CHECK(w.front() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w.back() == doctest::Approx(8.0).epsilon(1e-12));
  double ratio = w[1] / w[0];
  for (std::size_t i = 1; i + 1 < w.size(); ++i)
    CHECK(w[i + 1] / w[i] == doctest::Approx(ratio).epsilon(1e-10));
  // The grid passes exactly through 2.0 at the tenth width.
  CHECK(w[9] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.dim() == 32);
}

TEST_CASE("cosine cutoff endpoints and midpoint") {
  CHECK(exex::cutoff_value(0.0, 8.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(exex::cutoff_value(8.0, 8.0)) < 1e-15);
  CHECK(exex::cutoff_value(4.0, 8.0) == doctest::Approx(0.5).epsilon(1e-12));
  double prev = 2.0;
  for (double r = 0.0; r <= 8.0; r += 0.5) {
    double v = exex::cutoff_value(r, 8.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("neighbor enumeration is strict about the cutoff sphere") {
  // One atom in a cubic cell of edge 4 with cutoff 8: image offsets with
  // squared integer norm 1, 2, 3 lie inside (distances 4, 5.66, 6.93) and
  // norm 4 lands exactly on the cutoff, which the strict inequality
  // excludes: 6 + 12 + 8 = 26 neighbors.
  auto solo = exex::make_configuration(
      cubic(4.0), Eigen::Matrix<double, 1, 3>::Zero(), {"Al"});
  auto nbrs = exex::build_neighbor_list(solo, 8.0);
  CHECK(nbrs.size() == 26);
  for (const auto& n : nbrs) {
    CHECK(n.r > 0.0);
    CHECK(n.r < 8.0);
    CHECK(n.rij.norm() == doctest::Approx(n.r).epsilon(1e-12));
    CHECK(n.center == 0);
  }

  // Cutoff exactly on the first image shell: nothing inside.
  CHECK(exex::build_neighbor_list(solo, 4.0).empty());
}

TEST_CASE("neighbor lists in a skewed cell match a brute-force enumeration") {
  Eigen::Matrix3d skew;
  skew << 6.0, 0, 0, 5.2, 1.9, 0, 0.4, 0.3, 7.5;  // strongly non-orthogonal
  Eigen::Matrix<double, Eigen::Dynamic, 3> f(2, 3);
  f << 0.1, 0.7, 0.35, 0.6, 0.15, 0.8;
  auto cfg = exex::make_configuration(skew, f, {"Al", "Al"});

  auto fast = exex::build_neighbor_list(cfg, 8.0);

  // Independent enumeration with a deliberately oversized image block.
  std::vector<double> brute;
  auto cart = cfg.cartesian();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = -10; a <= 10; ++a)
        for (int b = -10; b <= 10; ++b)
          for (int c = -10; c <= 10; ++c) {
            if (i == j && a == 0 && b == 0 && c == 0) continue;
            Eigen::RowVector3d shift = a * cfg.lattice.row(0) +
                                       b * cfg.lattice.row(1) +
                                       c * cfg.lattice.row(2);
            double r = (cart.row(j) + shift - cart.row(i)).norm();
            if (r > 0 && r < 8.0) brute.push_back(r);
          }

  REQUIRE(fast.size() == brute.size());
  std::vector<double> got;
  for (const auto& n : fast) got.push_back(n.r);
  std::sort(got.begin(), got.end());
  std::sort(brute.begin(), brute.end());
  for (std::size_t k = 0; k < got.size(); ++k)
    CHECK(got[k] == doctest::Approx(brute[k]).epsilon(1e-10));
}

TEST_CASE("an isolated atom has an exactly zero fingerprint") {
  auto solo = exex::make_configuration(
      cubic(30.0), Eigen::Matrix<double, 1, 3>::Zero(), {"Al"});
  long count = -1;
  Eigen::VectorXd fp = exex::agni_fingerprint(solo, AgniParams{}, &count);
  CHECK(count == 0);
  REQUIRE(fp.size() == 32);
  CHECK(fp.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("isolated dimer matches the closed-form fingerprint") {
  const double d = 2.5;
  AgniParams params;
  long count = -1;
  Eigen::VectorXd fp = exex::agni_fingerprint(dimer(d, 30.0), params, &count);
  CHECK(count == 2);  // each atom sees exactly the other

  // Hand-derived value at the width that lands exactly on 2.0.
  CHECK(fp[9] == doctest::Approx(0.14206174015970902).epsilon(1e-10));

  // Every scalar channel: two pairs, each contributing a normalized
  // Gaussian of the separation under the cosine taper.
  std::vector<double> w = params.widths();
  const double fc = 0.5 * (std::cos(std::numbers::pi * d / params.r_cut) + 1.0);
  for (int k = 0; k < 16; ++k) {
    double expected = 2.0 * std::exp(-d * d / (2 * w[k] * w[k])) /
                      (std::sqrt(2 * std::numbers::pi) * w[k]) * fc;
    CHECK(fp[k] == doctest::Approx(expected).epsilon(1e-12));
  }

  // The two displacement unit vectors cancel exactly, so every vector
  // channel is identically zero.
  for (int k = 16; k < 32; ++k) CHECK(fp[k] == 0.0);
}

TEST_CASE("a doubled supercell doubles every scalar channel") {
  AgniParams params;
  long c1 = 0, c2 = 0;
  Eigen::VectorXd one = exex::agni_fingerprint(exex::make_fcc(4.05), params, &c1);
  Eigen::VectorXd two =
      exex::agni_fingerprint(exex::make_fcc(4.05, 2, 1, 1), params, &c2);
  CHECK(c2 == 2 * c1);
  for (int k = 0; k < 16; ++k)
    CHECK(two[k] == doctest::Approx(2.0 * one[k]).epsilon(1e-10));
}

TEST_CASE("fingerprints are invariant to symmetry-preserving relabelings") {
  AgniParams params;
  exex::RngStream rng(2026, "invariance");
  for (int trial = 0; trial < 50; ++trial) {
    CrystalConfiguration c = exex::random_structure(16.6, 8, 2.0, 0.05, rng);
    Eigen::VectorXd fp = exex::agni_fingerprint(c, params);

    // Rigid translation (re-wrapped by construction).
    Eigen::Matrix<double, Eigen::Dynamic, 3> shifted = c.frac;
    shifted.col(0).array() += 0.37;
    shifted.col(1).array() += 0.81;
    shifted.col(2).array() += 0.55;
    auto t = exex::make_configuration(c.lattice, shifted, c.species);
    CHECK(rel_diff(fp, exex::agni_fingerprint(t, params)) < 1e-8);

    // Rigid rotation of the whole cell.
    Eigen::Vector3d axis = rng.on_sphere();
    Eigen::Matrix3d rot =
        Eigen::AngleAxisd(rng.uniform(0.0, 6.28), axis).toRotationMatrix();
    auto r = exex::make_configuration(c.lattice * rot.transpose(), c.frac,
                                      c.species);
    CHECK(rel_diff(fp, exex::agni_fingerprint(r, params)) < 1e-8);

    // Atom reordering.
    std::vector<int> perm = rng.permutation(c.n_atoms());
    Eigen::Matrix<double, Eigen::Dynamic, 3> reordered(c.n_atoms(), 3);
    for (int i = 0; i < c.n_atoms(); ++i) reordered.row(i) = c.frac.row(perm[i]);
    auto p = exex::make_configuration(c.lattice, reordered, c.species);
    CHECK(rel_diff(fp, exex::agni_fingerprint(p, params)) < 1e-8);

    // Cyclic relabeling of the lattice vectors (same crystal, new labels).
    Eigen::Matrix3d cyc;
    cyc.row(0) = c.lattice.row(1);
    cyc.row(1) = c.lattice.row(2);
    cyc.row(2) = c.lattice.row(0);
    Eigen::Matrix<double, Eigen::Dynamic, 3> fcyc(c.n_atoms(), 3);
    fcyc.col(0) = c.frac.col(1);
    fcyc.col(1) = c.frac.col(2);
    fcyc.col(2) = c.frac.col(0);
    auto l = exex::make_configuration(cyc, fcyc, c.species);
    CHECK(rel_diff(fp, exex::agni_fingerprint(l, params)) < 1e-8);
  }
}
