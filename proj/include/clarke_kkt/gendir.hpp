#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "clarke_kkt/problem.hpp"
#include "clarke_kkt/random.hpp"

namespace clarke_kkt {

/// Multi-scale sampling schedule for the generalized directional derivative.
///
/// Level k (1..levels) draws base points within base_radius * decay^k of u and
/// steps t in (0, base_step * decay^k].
struct GenDirConfig {
  int levels = 6;
  double base_radius = 0.1;
  double base_step = 0.1;
  double decay = 0.5;
  int samples_per_level = 200;
  std::uint64_t seed = 42;

  void validate() const {
    if (levels < 2) throw std::invalid_argument("levels must be at least 2");
    if (!(base_radius > 0.0)) throw std::invalid_argument("base_radius must be positive");
    if (!(base_step > 0.0)) throw std::invalid_argument("base_step must be positive");
    if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("decay must lie in (0, 1)");
    if (samples_per_level < 1) throw std::invalid_argument("samples_per_level must be at least 1");
  }
};

struct GenDirEstimate {
  double value = 0.0;             // |phi| * per_level.back()
  std::vector<double> per_level;  // M_k, the largest quotient seen at level k
  double direction_norm = 0.0;
};

/// Sampled estimate of H_u(phi) = sup limsup (F(v + t phi) - F(v)) / t over v -> u, t -> 0+.
///
/// The direction is normalized before sampling and the finest-level maximum is
/// rescaled by |phi|, so positive homogeneity holds by construction. u itself,
/// with the largest step of the level, is always one of the base points.
inline GenDirEstimate estimate_gen_dir_deriv(const ProblemDefinition& prob, const Vector& u, const Vector& phi,
                                             const GenDirConfig& cfg = {}) {
  cfg.validate();
  detail::require_point(prob, u);
  detail::require_point(prob, phi, "direction");

  GenDirEstimate est;
  est.direction_norm = phi.norm();
  if (est.direction_norm == 0.0) {
    est.per_level.assign(static_cast<std::size_t>(cfg.levels), 0.0);
    return est;
  }
  const Vector d = phi / est.direction_norm;

  auto quotient = [&](const Vector& base, double t) {
    const double q = (detail::evaluate_finite(prob.objective, base + t * d) - detail::evaluate_finite(prob.objective, base)) / t;
    if (!std::isfinite(q)) throw EstimationFailure("non-finite difference quotient");
    return q;
  };

  est.per_level.reserve(static_cast<std::size_t>(cfg.levels));
  for (int level = 1; level <= cfg.levels; ++level) {
    const double scale = std::pow(cfg.decay, level);
    const double radius = cfg.base_radius * scale;
    const double max_step = cfg.base_step * scale;
    double best = quotient(u, max_step);
    for (int j = 0; j < cfg.samples_per_level; ++j) {
      Substream rng(cfg.seed, (static_cast<std::uint64_t>(level) << 32) | static_cast<std::uint64_t>(j), StreamTag::gendir);
      const Vector base = rng.in_ball(u, radius);
      const double t = max_step * rng.uniform_open_closed();
      best = std::max(best, quotient(base, t));
    }
    est.per_level.push_back(best);
  }
  est.value = est.direction_norm * est.per_level.back();
  if (!std::isfinite(est.value)) throw EstimationFailure("non-finite generalized directional derivative");
  return est;
}

/// One comparison inside a property check: pass iff gap <= tolerance.
struct PropertyCase {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct PropertyReport {
  std::string property;
  std::vector<PropertyCase> cases;

  bool pass() const {
    return std::all_of(cases.begin(), cases.end(), [](const PropertyCase& c) { return c.pass; });
  }
  double worst_gap() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : cases) worst = std::max(worst, c.gap);
    return worst;
  }
};

/// Positive homogeneity: H(lambda phi) against lambda H(phi), same seed.
inline PropertyReport check_homogeneity(const ProblemDefinition& prob, const Vector& u, const Vector& phi,
                                        const std::vector<double>& lambdas, const GenDirConfig& cfg = {}) {
  for (double lambda : lambdas)
    if (!(lambda > 0.0)) throw std::invalid_argument("homogeneity factors must be positive");
  const double base = estimate_gen_dir_deriv(prob, u, phi, cfg).value;
  PropertyReport report{"homogeneity", {}};
  for (double lambda : lambdas) {
    PropertyCase c;
    c.label = "lambda=" + detail::format_number(lambda);
    c.lhs = estimate_gen_dir_deriv(prob, u, Vector(lambda * phi), cfg).value;
    c.rhs = lambda * base;
    c.gap = std::fabs(c.lhs - c.rhs);
    c.tolerance = 1e-12 * (1.0 + lambda) * std::fabs(base);
    c.pass = c.gap <= c.tolerance;
    report.cases.push_back(c);
  }
  return report;
}

inline double default_subadditivity_tolerance(const Vector& phi1, const Vector& phi2) {
  return 0.05 * (1.0 + phi1.norm() + phi2.norm());
}

/// Subadditivity: s = H(phi1 + phi2) - H(phi1) - H(phi2) must not exceed the tolerance.
inline PropertyReport check_subadditivity(const ProblemDefinition& prob, const Vector& u, const Vector& phi1,
                                          const Vector& phi2, const GenDirConfig& cfg = {},
                                          std::optional<double> tolerance = std::nullopt) {
  if (phi1.size() != phi2.size()) throw std::invalid_argument("direction dimensions differ");
  PropertyCase c;
  c.label = "pair";
  c.lhs = estimate_gen_dir_deriv(prob, u, Vector(phi1 + phi2), cfg).value;
  c.rhs = estimate_gen_dir_deriv(prob, u, phi1, cfg).value + estimate_gen_dir_deriv(prob, u, phi2, cfg).value;
  c.gap = c.lhs - c.rhs;
  c.tolerance = tolerance.value_or(default_subadditivity_tolerance(phi1, phi2));
  c.pass = c.gap <= c.tolerance;
  return {"subadditivity", {c}};
}

}  // namespace clarke_kkt
