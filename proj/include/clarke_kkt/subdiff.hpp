#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "clarke_kkt/gendir.hpp"
#include "clarke_kkt/problem.hpp"
#include "clarke_kkt/random.hpp"

namespace clarke_kkt {

struct SubdiffConfig {
  std::optional<double> radius;  // default 1e-3 * (1 + |u|_inf)
  std::optional<int> count;      // default 30 + 2n
  std::uint64_t seed = 42;

  double radius_at(const Vector& u) const {
    return radius.value_or(1e-3 * (1.0 + (u.size() ? u.cwiseAbs().maxCoeff() : 0.0)));
  }
  int count_for(std::size_t n) const { return count.value_or(30 + 2 * static_cast<int>(n)); }
};

/// Finite sample of gradients whose convex hull stands in for the generalized sub-gradient set.
struct SubdifferentialApprox {
  std::vector<Vector> points;
  double radius_used = 0.0;
  std::uint64_t seed = 0;

  /// n x k matrix with one sampled gradient per column.
  Matrix as_matrix() const {
    if (points.empty()) return {};
    Matrix g(points.front().size(), static_cast<Eigen::Index>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j) g.col(static_cast<Eigen::Index>(j)) = points[j];
    return g;
  }
};

/// Gradient sampling around u: sample 0 is u itself, the rest are uniform in
/// B_radius(u); every gradient uses step radius/100 and the kink-avoidance rule.
inline SubdifferentialApprox sample_subdifferential(const ProblemDefinition& prob, const Vector& u, const SubdiffConfig& cfg = {}) {
  detail::require_point(prob, u);
  const double radius = cfg.radius_at(u);
  const int count = cfg.count_for(prob.n);
  if (!(radius > 0.0)) throw std::invalid_argument("sampling radius must be positive");
  if (count < 1) throw std::invalid_argument("at least one gradient sample is required");

  const double h = radius / 100.0;
  SubdifferentialApprox approx{{}, radius, cfg.seed};
  approx.points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector x = u;
    if (i > 0) {
      Substream rng(cfg.seed, static_cast<std::uint64_t>(i), StreamTag::subdiff);
      x = rng.in_ball(u, radius);
    }
    Vector g = kink_avoiding_gradient(prob.objective, x, h).gradient;
    if (!g.allFinite()) throw EstimationFailure("non-finite sampled gradient");
    approx.points.push_back(std::move(g));
  }
  return approx;
}

struct MembershipResult {
  bool member = true;
  double worst_gap = -std::numeric_limits<double>::infinity();  // max over directions of <phi, g> - H(phi)
  Vector worst_direction;
};

inline int default_membership_directions(std::size_t n) { return 2 * static_cast<int>(n) + 64; }

/// Support-function test of <phi, g> <= H_u(phi) + tolerance over the signed
/// coordinate directions plus (directions - 2n) random unit directions.
inline MembershipResult membership_test(const ProblemDefinition& prob, const Vector& u, const Vector& g,
                                        const GenDirConfig& cfg = {}, std::optional<int> directions = std::nullopt,
                                        double tolerance = 0.05) {
  detail::require_point(prob, u);
  detail::require_point(prob, g, "candidate");
  const auto n = static_cast<Eigen::Index>(prob.n);
  const int total = directions.value_or(default_membership_directions(prob.n));
  if (total < 2 * n) throw std::invalid_argument("membership test needs at least 2n directions");

  MembershipResult result;
  auto probe = [&](const Vector& phi) {
    const double gap = phi.dot(g) - estimate_gen_dir_deriv(prob, u, phi, cfg).value;
    if (gap > result.worst_gap) {
      result.worst_gap = gap;
      result.worst_direction = phi;
    }
    if (gap > tolerance) result.member = false;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    probe(Vector::Unit(n, i));
    probe(Vector(-Vector::Unit(n, i)));
  }
  for (int j = 0; j < total - 2 * static_cast<int>(n); ++j) {
    Substream rng(cfg.seed, static_cast<std::uint64_t>(j), StreamTag::membership);
    probe(rng.unit_direction(n));
  }
  return result;
}

}  // namespace clarke_kkt
