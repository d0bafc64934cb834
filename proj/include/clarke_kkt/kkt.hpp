#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clarke_kkt/errors.hpp"
#include "clarke_kkt/problem.hpp"
#include "clarke_kkt/solver.hpp"
#include "clarke_kkt/subdiff.hpp"

namespace clarke_kkt {

struct Jacobians {
  Matrix eq;    // m x n
  Matrix ineq;  // p x n
};

/// Finite-difference Jacobians of G1 and G2; row i is the gradient of component i.
inline Jacobians jacobians(const ProblemDefinition& prob, const Vector& u, std::optional<double> step = std::nullopt) {
  detail::require_point(prob, u);
  const double h = step.value_or(default_fd_step(u));
  const auto n = static_cast<Eigen::Index>(prob.n);
  Jacobians jac{Matrix(static_cast<Eigen::Index>(prob.m()), n), Matrix(static_cast<Eigen::Index>(prob.p()), n)};
  for (std::size_t i = 0; i < prob.m(); ++i)
    jac.eq.row(static_cast<Eigen::Index>(i)) = finite_diff_gradient(prob.eq[i], u, h).transpose();
  for (std::size_t i = 0; i < prob.p(); ++i)
    jac.ineq.row(static_cast<Eigen::Index>(i)) = finite_diff_gradient(prob.ineq[i], u, h).transpose();
  return jac;
}

/// Empirical K with |J1(u0 + phi) - J1(u0)|_F <= K |phi| over N perturbations |phi| < alpha.
/// Diagnostic only; verdicts never depend on it.
inline double check_jacobian_lipschitz(const ProblemDefinition& prob, const Vector& u0, double alpha, std::size_t samples,
                                       std::uint64_t seed) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (prob.m() == 0) return 0.0;
  const Matrix base = jacobians(prob, u0).eq;
  double k = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    Substream rng(seed, i, StreamTag::jacobian_lipschitz);
    const Vector shifted = rng.in_ball(u0, alpha);
    const double dist = (shifted - u0).norm();
    if (dist == 0.0) continue;
    k = std::max(k, (jacobians(prob, shifted).eq - base).norm() / dist);
  }
  return k;
}

struct ConstraintQualificationReport {
  Eigen::Index j1_rank = 0;
  bool j1_onto = true;
  std::optional<Vector> slater_direction;
  bool slater_ok = true;
  std::vector<std::size_t> active_set;  // 0-based inequality indices
};

struct CqConfig {
  double active_tol = 1e-6;
  double box = 1e3;  // |phi0|_inf bound for the Slater direction
  SolverConfig solver{};
};

inline Eigen::Index numerical_rank(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sigma = svd.singularValues();
  const double threshold = 1e-8 * sigma[0] * static_cast<double>(std::max(a.rows(), a.cols()));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > threshold) ++rank;
  return rank;
}

namespace detail {

inline Matrix select_rows(const Matrix& a, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = a.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

inline bool is_slater_certificate(const Matrix& j1, const Matrix& j2a, const Vector& phi, double box) {
  if (!phi.allFinite() || phi.cwiseAbs().maxCoeff() > box) return false;
  if (j1.rows() > 0 && (j1 * phi).cwiseAbs().maxCoeff() > 1e-8) return false;
  return j2a.rows() == 0 || (j2a * phi).maxCoeff() <= -1.0 + 1e-8;
}

struct SlaterSolve {
  std::optional<Vector> direction;
  double optimum = 0.0;
};

/// Searches phi with |phi|_inf <= box, J1 phi = 0, J2a phi <= -1 by projected gradient on
/// 0.5|J1 phi|^2 + 0.5 sum max(0, J2a phi + 1)^2, then polishes the iterate onto the null
/// space of J1 and rescales the margin to exactly 1.
inline SlaterSolve solve_slater_lp(const Matrix& j1, const Matrix& j2a, double box, const SolverConfig& cfg) {
  const auto n = j2a.cols();
  Matrix curvature = Matrix::Zero(n, n);
  if (j1.rows() > 0) curvature += j1.transpose() * j1;
  curvature += j2a.transpose() * j2a;
  const double lipschitz = power_iteration(curvature, cfg.power_iterations);

  auto objective = [&](const Vector& phi) {
    const double eq = j1.rows() > 0 ? (j1 * phi).squaredNorm() : 0.0;
    return 0.5 * (eq + ((j2a * phi).array() + 1.0).cwiseMax(0.0).square().sum());
  };
  auto gradient = [&](const Vector& phi) -> Vector {
    Vector g = j2a.transpose() * ((j2a * phi).array() + 1.0).cwiseMax(0.0).matrix();
    if (j1.rows() > 0) g += j1.transpose() * (j1 * phi);
    return g;
  };
  auto project = [&](const Vector& phi) -> Vector { return phi.cwiseMax(-box).cwiseMin(box); };

  const auto pg = projected_gradient(Vector::Zero(n), lipschitz, objective, gradient, project, cfg);

  Vector phi = pg.x;
  if (j1.rows() > 0) phi -= j1.completeOrthogonalDecomposition().solve(Vector(j1 * phi));
  const double margin = -(j2a * phi).maxCoeff();
  SlaterSolve out{std::nullopt, pg.objective};
  if (margin > 0.0) {
    phi /= margin;
    if (is_slater_certificate(j1, j2a, phi, box)) {
      out.direction = phi;
      return out;
    }
  }
  if (pg.objective <= 1e-12 || !pg.converged)
    throw CqIndeterminate("Slater direction search did not settle (objective " + format_number(pg.objective) + ")");
  return out;
}

}  // namespace detail

/// Surjectivity of the equality Jacobian and existence of a Slater direction for the active inequalities.
inline ConstraintQualificationReport check_constraint_qualification(const ProblemDefinition& prob, const Vector& u0,
                                                                    const CqConfig& cfg = {}) {
  const Jacobians jac = jacobians(prob, u0);
  const ConstraintValues values = eval_constraints(prob, u0);

  ConstraintQualificationReport report;
  report.j1_rank = numerical_rank(jac.eq);
  report.j1_onto = report.j1_rank == static_cast<Eigen::Index>(prob.m());
  for (std::size_t i = 0; i < prob.p(); ++i)
    if (values.ineq[static_cast<Eigen::Index>(i)] >= -cfg.active_tol) report.active_set.push_back(i);

  if (report.active_set.empty()) {
    report.slater_ok = true;
    report.slater_direction = Vector::Zero(static_cast<Eigen::Index>(prob.n));
    return report;
  }
  const auto solve = detail::solve_slater_lp(jac.eq, detail::select_rows(jac.ineq, report.active_set), cfg.box, cfg.solver);
  report.slater_ok = solve.direction.has_value();
  report.slater_direction = solve.direction;
  return report;
}

/// (u*, z1, z2) with u* a convex combination of sampled subgradients; residual = |u* + J1^T z1 + J2^T z2|.
struct MultiplierCertificate {
  Vector u_star;
  Vector lambda;
  Vector z1;
  Vector z2;
  double residual = 0.0;
  double slackness = 0.0;  // <G2(u0), z2>
  bool converged = false;
  int iterations = 0;
};

inline MultiplierCertificate recover_multipliers(const ProblemDefinition& prob, const Vector& u0, const SubdifferentialApprox& sd,
                                                 const Jacobians& jac, const std::vector<std::size_t>& active_set,
                                                 const SolverConfig& cfg = {}) {
  if (sd.points.empty()) throw EstimationFailure("empty subdifferential sample");
  for (auto i : active_set)
    if (i >= prob.p()) throw std::invalid_argument("active index out of range");
  const Matrix g = sd.as_matrix();
  const auto ls = solve_structured_ls(g, jac.eq, detail::select_rows(jac.ineq, active_set), cfg);

  MultiplierCertificate cert;
  cert.lambda = ls.lambda;
  cert.u_star = g * ls.lambda;
  cert.z1 = ls.z1;
  cert.z2 = Vector::Zero(static_cast<Eigen::Index>(prob.p()));
  for (std::size_t j = 0; j < active_set.size(); ++j)
    cert.z2[static_cast<Eigen::Index>(active_set[j])] = ls.z2[static_cast<Eigen::Index>(j)];
  cert.residual = ls.residual;
  cert.slackness = eval_constraints(prob, u0).ineq.dot(cert.z2) + 0.0;  // no -0 in reports
  cert.converged = ls.converged;
  cert.iterations = ls.iterations;
  return cert;
}

struct StationarityTolerances {
  double feasibility = 1e-6;
  double active = 1e-6;
  double stationarity = 1e-2;
};

struct StationarityConfig {
  StationarityTolerances tol{};
  SubdiffConfig subdiff{};
  SolverConfig solver{};
  double slater_box = 1e3;
};

enum class Verdict { stationary, not_stationary, cq_failed, infeasible, error };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stationary: return "stationary";
    case Verdict::not_stationary: return "not_stationary";
    case Verdict::cq_failed: return "cq_failed";
    case Verdict::infeasible: return "infeasible";
    case Verdict::error: return "error";
  }
  return "error";
}

struct Feasibility {
  double eq_norm = 0.0;             // |G1(u0)|_inf
  double max_ineq_violation = 0.0;  // max(0, max_i G2_i(u0))
};

struct StageError {
  std::string stage;
  std::string message;
};

struct StageTimings {
  double feasibility_ms = 0.0;
  double cq_ms = 0.0;
  double subdiff_ms = 0.0;
  double multipliers_ms = 0.0;
  double total_ms = 0.0;
};

struct StationarityReport {
  Feasibility feasibility;
  std::optional<ConstraintQualificationReport> cq;
  std::optional<MultiplierCertificate> certificate;
  std::size_t subdiff_samples = 0;
  Verdict verdict = Verdict::error;
  std::optional<StageError> error;
  StageTimings timings;
};

/// Checks the necessary conditions at a candidate point: feasibility, constraint
/// qualification, then a multiplier certificate over the sampled subdifferential.
/// A failing stage is recorded in `error` with verdict `error`.
inline StationarityReport verify_stationarity(const ProblemDefinition& prob, const Vector& u0, const StationarityConfig& cfg = {}) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t) { return std::chrono::duration<double, std::milli>(clock::now() - t).count(); };
  const auto start = clock::now();

  StationarityReport report;
  const char* stage = "feasibility";
  try {
    auto t = clock::now();
    const ConstraintValues values = eval_constraints(prob, u0);
    report.feasibility.eq_norm = prob.m() ? values.eq.cwiseAbs().maxCoeff() : 0.0;
    report.feasibility.max_ineq_violation = prob.p() ? std::max(0.0, values.ineq.maxCoeff()) : 0.0;
    report.timings.feasibility_ms = ms_since(t);
    if (report.feasibility.eq_norm > cfg.tol.feasibility || report.feasibility.max_ineq_violation > cfg.tol.feasibility) {
      report.verdict = Verdict::infeasible;
      report.timings.total_ms = ms_since(start);
      return report;
    }

    stage = "constraint_qualification";
    t = clock::now();
    report.cq = check_constraint_qualification(prob, u0, CqConfig{cfg.tol.active, cfg.slater_box, cfg.solver});
    report.timings.cq_ms = ms_since(t);

    stage = "subdifferential";
    t = clock::now();
    const auto sd = sample_subdifferential(prob, u0, cfg.subdiff);
    report.subdiff_samples = sd.points.size();
    report.timings.subdiff_ms = ms_since(t);

    stage = "multipliers";
    t = clock::now();
    report.certificate = recover_multipliers(prob, u0, sd, jacobians(prob, u0), report.cq->active_set, cfg.solver);
    report.timings.multipliers_ms = ms_since(t);

    if (!report.cq->j1_onto || !report.cq->slater_ok)
      report.verdict = Verdict::cq_failed;
    else if (report.certificate->residual <= cfg.tol.stationarity)
      report.verdict = Verdict::stationary;
    else
      report.verdict = Verdict::not_stationary;
  } catch (const std::exception& e) {
    report.verdict = Verdict::error;
    report.error = StageError{stage, e.what()};
  }
  report.timings.total_ms = ms_since(start);
  return report;
}

}  // namespace clarke_kkt
