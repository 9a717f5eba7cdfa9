#include "exex/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace exex {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream_name) {
  return splitmix64(seed ^ splitmix64(fnv1a(stream_name)));
}

RngStream::RngStream(std::uint64_t seed) : base_seed_(seed), eng_(seed) {}

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : RngStream(mix_seed(seed, name)) {}

RngStream RngStream::substream(std::string_view name) const {
  return RngStream(base_seed_, name);
}

std::uint64_t RngStream::bits() { return eng_(); }

double RngStream::uniform01() {
  return std::ldexp(static_cast<double>(eng_() >> 11), -53);
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = std::ldexp(static_cast<double>((eng_() >> 11) + 1), -53);
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double RngStream::normal(double mean, double sd) { return mean + sd * normal(); }

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::index: n must be positive");
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(eng_()) * n) >> 64);
}

std::vector<int> RngStream::permutation(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    std::size_t j = index(static_cast<std::size_t>(i) + 1);
    std::swap(p[static_cast<std::size_t>(i)], p[j]);
  }
  return p;
}

Eigen::VectorXd RngStream::normal_vector(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Eigen::Vector3d RngStream::on_sphere() {
  while (true) {
    Eigen::Vector3d v(normal(), normal(), normal());
    double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Eigen::Vector3d RngStream::in_ball(double radius) {
  while (true) {
    Eigen::Vector3d v(uniform(-radius, radius), uniform(-radius, radius),
                      uniform(-radius, radius));
    if (v.norm() <= radius) return v;
  }
}

}  // namespace exex
