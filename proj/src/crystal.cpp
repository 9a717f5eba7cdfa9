#include "exex/crystal.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "exex/format.hpp"

namespace exex {

namespace {

double wrap_unit(double f) {
  double r = f - std::floor(f);
  if (r >= 1.0) r -= 1.0;
  if (r < 0.0) r += 1.0;
  return r;
}

/// Shortest non-zero lattice translation within a +/-extent image block.
double min_self_image(const Eigen::Matrix3d& lattice, int extent) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = -extent; i <= extent; ++i)
    for (int j = -extent; j <= extent; ++j)
      for (int k = -extent; k <= extent; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        Eigen::RowVector3d t = i * lattice.row(0) + j * lattice.row(1) +
                               k * lattice.row(2);
        best = std::min(best, t.norm());
      }
  return best;
}

/// Minimum periodic distance from Cartesian point x to atom row `other`
/// over the image block.
double min_image_distance(const Eigen::RowVector3d& x,
                          const Eigen::RowVector3d& other,
                          const Eigen::Matrix3d& lattice, int extent) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = -extent; i <= extent; ++i)
    for (int j = -extent; j <= extent; ++j)
      for (int k = -extent; k <= extent; ++k) {
        Eigen::RowVector3d d = other + i * lattice.row(0) +
                               j * lattice.row(1) + k * lattice.row(2) - x;
        best = std::min(best, d.norm());
      }
  return best;
}

}  // namespace

double signed_volume(const Eigen::Matrix3d& lattice) {
  return lattice.row(0).dot(lattice.row(1).cross(lattice.row(2)));
}

CrystalConfiguration make_configuration(
    const Eigen::Matrix3d& lattice,
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& frac,
    std::vector<std::string> species) {
  if (static_cast<int>(species.size()) != frac.rows())
    throw std::invalid_argument(
        "make_configuration: species count does not match atom count");
  double det = signed_volume(lattice);
  double scale = lattice.row(0).norm() * lattice.row(1).norm() *
                 lattice.row(2).norm();
  if (!(std::abs(det) > 1e-10 * std::max(scale, 1e-30))) {
    std::ostringstream msg;
    msg << "make_configuration: degenerate (coplanar) lattice vectors a=("
        << lattice(0, 0) << ", " << lattice(0, 1) << ", " << lattice(0, 2)
        << "), b=(" << lattice(1, 0) << ", " << lattice(1, 1) << ", "
        << lattice(1, 2) << "), c=(" << lattice(2, 0) << ", " << lattice(2, 1)
        << ", " << lattice(2, 2) << ")";
    throw std::invalid_argument(msg.str());
  }
  CrystalConfiguration cfg;
  cfg.lattice = lattice;
  cfg.frac = frac;
  cfg.species = std::move(species);
  if (det < 0) {
    // Swap b and c rows together with the matching fractional columns so
    // every Cartesian position is preserved while the cell becomes
    // right-handed.
    cfg.lattice.row(1).swap(cfg.lattice.row(2));
    cfg.frac.col(1).swap(cfg.frac.col(2));
  }
  for (Eigen::Index i = 0; i < cfg.frac.rows(); ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      cfg.frac(i, j) = wrap_unit(cfg.frac(i, j));
  return cfg;
}

double cell_volume(const CrystalConfiguration& cfg) {
  double v = signed_volume(cfg.lattice);
  if (!(v > 0))
    throw std::invalid_argument("cell_volume: configuration not normalized");
  return v;
}

double min_pair_distance(const CrystalConfiguration& cfg, int image_extent) {
  const int n = cfg.n_atoms();
  if (n == 0)
    throw std::invalid_argument("min_pair_distance: empty configuration");
  double best = min_self_image(cfg.lattice, image_extent);
  Eigen::Matrix<double, Eigen::Dynamic, 3> cart = cfg.cartesian();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double d = min_image_distance(cart.row(i), cart.row(j), cfg.lattice,
                                    image_extent);
      best = std::min(best, d);
    }
  return best;
}

CrystalConfiguration random_structure(double v_ref, int n_atoms, double min_sep,
                                      double vol_jitter, RngStream& rng,
                                      long attempt_cap,
                                      const std::string& species) {
  if (n_atoms < 1)
    throw std::invalid_argument("random_structure: n_atoms must be positive");
  if (v_ref <= 0)
    throw std::invalid_argument("random_structure: v_ref must be positive");

  const double deg30 = 30.0 * std::numbers::pi / 180.0;
  const double deg150 = 150.0 * std::numbers::pi / 180.0;
  double target_volume =
      static_cast<double>(n_atoms) * v_ref *
      rng.uniform(1.0 - vol_jitter, 1.0 + vol_jitter);

  const int extent = 2;
  Eigen::Matrix3d lattice;
  for (int tries = 0;; ++tries) {
    if (tries >= 1000)
      throw std::runtime_error(
          "random_structure: could not draw a usable lattice (cell "
          "translations keep falling below min_sep); use a smaller min_sep "
          "or a larger v_ref");
    Eigen::Matrix3d raw;
    for (int r = 0; r < 3; ++r) {
      double len = std::exp(rng.uniform(0.0, std::log(3.0)));
      raw.row(r) = len * rng.on_sphere().transpose();
    }
    bool angles_ok = true;
    for (int r = 0; r < 3 && angles_ok; ++r)
      for (int s = r + 1; s < 3 && angles_ok; ++s) {
        double c = raw.row(r).dot(raw.row(s)) /
                   (raw.row(r).norm() * raw.row(s).norm());
        double ang = std::acos(std::clamp(c, -1.0, 1.0));
        if (ang < deg30 || ang > deg150) angles_ok = false;
      }
    if (!angles_ok) continue;
    double v0 = std::abs(signed_volume(raw));
    if (v0 < 1e-9) continue;
    Eigen::Matrix3d scaled = raw * std::cbrt(target_volume / v0);
    // A cell whose own translations fall inside min_sep can never satisfy
    // the pair-separation postcondition (every atom sits min_sep-close to
    // its periodic self-image), so such draws are rejected like any other
    // constraint violation.
    if (min_self_image(scaled, extent) <= min_sep) continue;
    lattice = scaled;
    break;
  }

  Eigen::Matrix<double, Eigen::Dynamic, 3> frac(n_atoms, 3);
  Eigen::Matrix<double, Eigen::Dynamic, 3> cart(n_atoms, 3);
  long attempts = 0;
  int placed = 0;
  while (placed < n_atoms) {
    if (attempts >= attempt_cap)
      throw std::runtime_error(
          "random_structure: placement failed after " +
          std::to_string(attempt_cap) +
          " attempts; use a smaller min_sep or a larger v_ref");
    ++attempts;
    Eigen::RowVector3d f(rng.uniform01(), rng.uniform01(), rng.uniform01());
    Eigen::RowVector3d x = f * lattice;
    bool ok = true;
    for (int j = 0; j < placed && ok; ++j)
      if (min_image_distance(x, cart.row(j), lattice, extent) <= min_sep)
        ok = false;
    if (!ok) continue;
    frac.row(placed) = f;
    cart.row(placed) = x;
    ++placed;
  }
  return make_configuration(lattice, frac,
                            std::vector<std::string>(n_atoms, species));
}

CrystalConfiguration perturb_structure(const CrystalConfiguration& cfg,
                                       double max_disp, RngStream& rng) {
  if (max_disp < 0)
    throw std::invalid_argument("perturb_structure: max_disp must be >= 0");
  Eigen::Matrix<double, Eigen::Dynamic, 3> cart = cfg.cartesian();
  for (Eigen::Index i = 0; i < cart.rows(); ++i)
    cart.row(i) += rng.in_ball(max_disp).transpose();
  Eigen::Matrix3d inv = cfg.lattice.inverse();
  Eigen::Matrix<double, Eigen::Dynamic, 3> frac = cart * inv;
  return make_configuration(cfg.lattice, frac, cfg.species);
}

CrystalConfiguration make_fcc(double a, int nx, int ny, int nz,
                              const std::string& species) {
  const int cells = nx * ny * nz;
  Eigen::Matrix3d lattice = Eigen::Matrix3d::Zero();
  lattice(0, 0) = a * nx;
  lattice(1, 1) = a * ny;
  lattice(2, 2) = a * nz;
  const double basis[4][3] = {
      {0.0, 0.0, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}};
  Eigen::Matrix<double, Eigen::Dynamic, 3> frac(4 * cells, 3);
  int row = 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k)
        for (const auto& b : basis) {
          frac(row, 0) = (i + b[0]) / nx;
          frac(row, 1) = (j + b[1]) / ny;
          frac(row, 2) = (k + b[2]) / nz;
          ++row;
        }
  return make_configuration(lattice, frac,
                            std::vector<std::string>(4 * cells, species));
}

std::string to_extended_xyz(const CrystalConfiguration& cfg) {
  std::ostringstream out;
  out << cfg.n_atoms() << "\n";
  out << "Lattice=\"";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (r != 0 || c != 0) out << " ";
      out << fmt_g12(cfg.lattice(r, c));
    }
  out << "\"\n";
  Eigen::Matrix<double, Eigen::Dynamic, 3> cart = cfg.cartesian();
  for (int i = 0; i < cfg.n_atoms(); ++i)
    out << cfg.species[static_cast<std::size_t>(i)] << " "
        << fmt_g12(cart(i, 0)) << " " << fmt_g12(cart(i, 1)) << " "
        << fmt_g12(cart(i, 2)) << "\n";
  return out.str();
}

CrystalConfiguration read_extended_xyz(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_extended_xyz: missing atom-count line");
  int n = 0;
  try {
    n = std::stoi(line);
  } catch (const std::exception&) {
    throw std::runtime_error("read_extended_xyz: bad atom count '" + line + "'");
  }
  if (n < 1) throw std::runtime_error("read_extended_xyz: bad atom count");
  if (!std::getline(in, line))
    throw std::runtime_error("read_extended_xyz: missing lattice line");
  auto first = line.find('"');
  auto last = line.rfind('"');
  if (line.find("Lattice=") == std::string::npos || first == std::string::npos ||
      last == first)
    throw std::runtime_error("read_extended_xyz: malformed lattice line '" +
                             line + "'");
  std::istringstream lat(line.substr(first + 1, last - first - 1));
  Eigen::Matrix3d lattice;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!(lat >> lattice(r, c)))
        throw std::runtime_error(
            "read_extended_xyz: lattice line needs 9 numbers");
  Eigen::Matrix<double, Eigen::Dynamic, 3> cart(n, 3);
  std::vector<std::string> species;
  species.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("read_extended_xyz: truncated atom list");
    std::istringstream row(line);
    std::string sp;
    if (!(row >> sp >> cart(i, 0) >> cart(i, 1) >> cart(i, 2)))
      throw std::runtime_error("read_extended_xyz: malformed atom line '" +
                               line + "'");
    species.push_back(sp);
  }
  Eigen::Matrix3d inv = lattice.inverse();
  return make_configuration(lattice, cart * inv, std::move(species));
}

CrystalConfiguration read_extended_xyz_string(const std::string& text) {
  std::istringstream in(text);
  return read_extended_xyz(in);
}

std::string to_extended_xyz_frames(const std::vector<CrystalConfiguration>& v) {
  std::string out;
  for (const auto& cfg : v) out += to_extended_xyz(cfg);
  return out;
}

std::vector<CrystalConfiguration> read_extended_xyz_frames(std::istream& in) {
  std::vector<CrystalConfiguration> frames;
  while (true) {
    // Peek for another frame: skip nothing, a frame starts immediately.
    if (in.peek() == std::char_traits<char>::eof()) break;
    frames.push_back(read_extended_xyz(in));
    // Consume a possible trailing newline-only remainder.
    while (in.peek() == '\n') in.get();
  }
  return frames;
}

}  // namespace exex
