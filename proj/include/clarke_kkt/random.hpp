#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace clarke_kkt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Salts separating the substream families of different operations.
enum class StreamTag : std::uint64_t {
  lipschitz = 1,
  gendir = 2,
  subdiff = 3,
  membership = 4,
  jacobian_lipschitz = 5,
  property_directions = 6,
  power_iteration = 7,
};

/// Counter-based generator: substream (seed, index) is a pure function of its
/// coordinates, so sample i of an operation never depends on how many samples
/// were drawn before it.
class Substream {
 public:
  Substream(std::uint64_t seed, std::uint64_t index, StreamTag tag) noexcept
      : key_(detail::splitmix64(detail::splitmix64(seed ^ (static_cast<std::uint64_t>(tag) << 56)) ^
                                detail::splitmix64(index))) {}

  std::uint64_t next_u64() noexcept { return detail::splitmix64(key_ + 0x632BE59BD9B4E019ULL * counter_++); }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_closed() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() noexcept {
    const double u1 = uniform_open_closed();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vector gaussian(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vector unit_direction(Eigen::Index n) {
    Vector v = gaussian(n);
    double norm = v.norm();
    while (norm == 0.0) {
      v = gaussian(n);
      norm = v.norm();
    }
    return v / norm;
  }

  /// Uniform point of the closed Euclidean ball B_radius(center).
  Vector in_ball(const Vector& center, double radius) {
    const auto n = center.size();
    const Vector dir = unit_direction(n);
    const double scale = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
    return center + scale * dir;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace clarke_kkt
