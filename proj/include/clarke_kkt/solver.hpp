#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "clarke_kkt/random.hpp"

namespace clarke_kkt {

struct SolverConfig {
  int iter_cap = 50000;
  double tol = 1e-10;
  int power_iterations = 100;
  int trace_every = 100;
};

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1} (sort-based).
inline Vector project_simplex(const Vector& v) {
  const auto k = v.size();
  if (k == 0) return v;
  std::vector<double> sorted(v.data(), v.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration
/// from a fixed pseudo-random start.
inline double power_iteration(const Matrix& m, int iterations) {
  const auto n = m.rows();
  if (n == 0) return 0.0;
  Substream rng(0x5EEDULL, static_cast<std::uint64_t>(n), StreamTag::power_iteration);
  Vector v = rng.unit_direction(n);
  double estimate = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Vector w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    estimate = v.dot(w);
    v = w / norm;
  }
  return std::max(estimate, v.dot(m * v));
}

struct ProjectedGradientResult {
  Vector x;
  double objective = 0.0;
  double gradient_mapping_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective at iterates 0, trace_every, 2*trace_every, ...
};

/// Projected gradient descent with fixed step 1/lipschitz. Stops once the
/// gradient mapping lipschitz * |x - P(x - grad/lipschitz)| drops to cfg.tol.
template <class Objective, class Gradient, class Projection>
ProjectedGradientResult projected_gradient(Vector x0, double lipschitz, Objective&& objective, Gradient&& gradient,
                                           Projection&& project, const SolverConfig& cfg) {
  ProjectedGradientResult r;
  r.x = project(x0);
  if (!(lipschitz > 0.0)) {
    // Zero curvature bound: the objective is constant along the feasible set.
    r.objective = objective(r.x);
    r.objective_trace.push_back(r.objective);
    r.converged = true;
    return r;
  }
  const double step = 1.0 / lipschitz;
  for (r.iterations = 0;; ++r.iterations) {
    if (cfg.trace_every > 0 && r.iterations % cfg.trace_every == 0) r.objective_trace.push_back(objective(r.x));
    Vector next = project(Vector(r.x - step * gradient(r.x)));
    r.gradient_mapping_norm = lipschitz * (next - r.x).norm();
    if (r.gradient_mapping_norm <= cfg.tol) {
      r.converged = true;
      break;
    }
    if (r.iterations >= cfg.iter_cap) break;
    r.x = std::move(next);
  }
  r.objective = objective(r.x);
  return r;
}

struct StructuredLsResult {
  Vector lambda;     // simplex weights on the columns of G
  Vector z1;         // free block
  Vector z2;         // nonnegative block
  double residual = 0.0;  // |G lambda + J1^T z1 + J2^T z2|_2
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;
};

/// Minimizes |G lambda + J1^T z1 + J2a^T z2|^2 over lambda in the simplex, z1 free, z2 >= 0.
inline StructuredLsResult solve_structured_ls(const Matrix& g, const Matrix& j1, const Matrix& j2_active,
                                              const SolverConfig& cfg = {}) {
  const auto n = g.rows();
  const auto k = g.cols();
  const auto m = j1.rows();
  const auto a = j2_active.rows();
  if (k < 1) throw std::invalid_argument("structured least squares needs at least one subgradient column");
  if ((m > 0 && j1.cols() != n) || (a > 0 && j2_active.cols() != n))
    throw std::invalid_argument("Jacobian column count must equal the subgradient dimension");

  Matrix stacked(n, k + m + a);
  stacked.leftCols(k) = g;
  if (m > 0) stacked.middleCols(k, m) = j1.transpose();
  if (a > 0) stacked.rightCols(a) = j2_active.transpose();
  const Matrix hessian = stacked.transpose() * stacked;
  const double lipschitz = power_iteration(hessian, cfg.power_iterations);

  auto objective = [&](const Vector& w) { return 0.5 * (stacked * w).squaredNorm(); };
  auto gradient = [&](const Vector& w) -> Vector { return hessian * w; };
  auto project = [&](const Vector& w) -> Vector {
    Vector out = w;
    out.head(k) = project_simplex(w.head(k));
    if (a > 0) out.tail(a) = w.tail(a).cwiseMax(0.0);
    return out;
  };

  Vector start = Vector::Zero(k + m + a);
  start.head(k).setConstant(1.0 / static_cast<double>(k));
  auto pg = projected_gradient(start, lipschitz, objective, gradient, project, cfg);

  StructuredLsResult r;
  r.lambda = pg.x.head(k);
  r.z1 = pg.x.segment(k, m);
  r.z2 = pg.x.tail(a);
  r.residual = (stacked * pg.x).norm();
  r.converged = pg.converged;
  r.iterations = pg.iterations;
  r.objective_trace = std::move(pg.objective_trace);
  return r;
}

}  // namespace clarke_kkt
