#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace exex {

/// Derive an independent stream seed from a base seed and a stream name.
/// The name is hashed (FNV-1a) and the combination passed through a
/// SplitMix64 finalizer so that related names give unrelated seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream_name);

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. All distribution transforms are implemented here (not via
/// std::*_distribution, whose outputs are implementation-defined) so that
/// a given seed produces byte-identical draws on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);
  RngStream(std::uint64_t seed, std::string_view name);

  /// A child stream keyed by name; independent of draws taken from *this.
  RngStream substream(std::string_view name) const;

  std::uint64_t base_seed() const { return base_seed_; }

  /// Raw 64 engine bits.
  std::uint64_t bits();

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();
  double normal(double mean, double sd);

  /// Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n);

  /// Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<int> permutation(int n);

  /// Vector of n independent standard normals.
  Eigen::VectorXd normal_vector(int n);

  /// Uniform direction on the unit sphere.
  Eigen::Vector3d on_sphere();

  /// Uniform draw in the closed ball of given radius (component-wise
  /// uniform proposals accepted when the norm does not exceed the radius).
  Eigen::Vector3d in_ball(double radius);

 private:
  std::uint64_t base_seed_;
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace exex
