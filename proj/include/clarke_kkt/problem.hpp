#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "clarke_kkt/errors.hpp"
#include "clarke_kkt/expression.hpp"
#include "clarke_kkt/parser.hpp"
#include "clarke_kkt/random.hpp"

namespace clarke_kkt {

/// min F(u) subject to G1(u) = 0 (m components) and G2(u) <= 0 (p components), u in R^n.
struct ProblemDefinition {
  std::string name = "problem";
  std::size_t n = 1;
  Expression objective = Expression::constant(0.0);
  std::vector<Expression> eq;
  std::vector<Expression> ineq;

  std::size_t m() const noexcept { return eq.size(); }
  std::size_t p() const noexcept { return ineq.size(); }

  /// Throws std::invalid_argument unless n >= 1 and every expression stays within x1..xn.
  void validate() const {
    if (n == 0) throw std::invalid_argument("problem dimension must be at least 1");
    auto check = [&](const Expression& e, const char* what) {
      if (e.max_variable_index() > n)
        throw std::invalid_argument(std::string(what) + " references x" + std::to_string(e.max_variable_index()) +
                                    " but dim is " + std::to_string(n));
    };
    check(objective, "objective");
    for (const auto& e : eq) check(e, "eq");
    for (const auto& e : ineq) check(e, "ineq");
  }

  friend bool operator==(const ProblemDefinition&, const ProblemDefinition&) = default;
};

namespace detail {

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace detail

/// Parses the line-oriented problem-file format (`dim`, `name`, `objective`, `eq`, `ineq`; '#' comments).
inline ProblemDefinition parse_problem(std::string_view text) {
  ProblemDefinition prob;
  std::optional<std::size_t> dim;
  std::size_t dim_line = 0;
  bool have_objective = false;
  std::vector<VariableUse> uses;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
    if (start == line.size()) continue;
    std::size_t key_end = start;
    while (key_end < line.size() && !std::isspace(static_cast<unsigned char>(line[key_end]))) ++key_end;
    const std::string_view key = line.substr(start, key_end - start);
    std::size_t rest_start = key_end;
    while (rest_start < line.size() && std::isspace(static_cast<unsigned char>(line[rest_start]))) ++rest_start;
    std::string_view rest = line.substr(rest_start);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);

    if (key != "dim" && key != "name" && key != "objective" && key != "eq" && key != "ineq")
      throw ParseError(line_no, start + 1, "unknown directive '" + std::string(key) + "'");
    if (rest.empty()) throw ParseError(line_no, key_end + 1, "directive '" + std::string(key) + "' needs an argument");

    if (key == "dim") {
      if (dim) throw ParseError(line_no, start + 1, "duplicate 'dim' (first given on line " + std::to_string(dim_line) + ")");
      std::size_t value = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
      if (ec != std::errc{} || ptr != rest.data() + rest.size() || value == 0)
        throw ParseError(line_no, rest_start + 1, "'dim' expects a positive integer");
      dim = value;
      dim_line = line_no;
    } else if (key == "name") {
      if (!detail::is_identifier(rest)) throw ParseError(line_no, rest_start + 1, "invalid name '" + std::string(rest) + "'");
      prob.name = std::string(rest);
    } else {
      Expression e = parse_expression(rest, line_no, rest_start, &uses);
      if (key == "objective") {
        if (have_objective) throw ParseError(line_no, start + 1, "duplicate 'objective'");
        prob.objective = std::move(e);
        have_objective = true;
      } else if (key == "eq") {
        prob.eq.push_back(std::move(e));
      } else {
        prob.ineq.push_back(std::move(e));
      }
    }
  }

  if (!dim) throw ParseError(line_no, 1, "missing 'dim' directive");
  if (!have_objective) throw ParseError(line_no, 1, "missing 'objective' directive");
  prob.n = *dim;
  for (const auto& use : uses) {
    if (use.index > prob.n)
      throw ParseError(use.line, use.column,
                       "variable index x" + std::to_string(use.index) + " out of range (dim " + std::to_string(prob.n) + ")");
  }
  return prob;
}

/// Inverse of parse_problem.
inline std::string print_problem(const ProblemDefinition& prob) {
  std::string out = "name " + prob.name + "\ndim " + std::to_string(prob.n) + "\nobjective " + prob.objective.to_string() + "\n";
  for (const auto& e : prob.eq) out += "eq " + e.to_string() + "\n";
  for (const auto& e : prob.ineq) out += "ineq " + e.to_string() + "\n";
  return out;
}

namespace detail {

inline void require_point(const ProblemDefinition& prob, const Vector& u, const char* what = "point") {
  if (static_cast<std::size_t>(u.size()) != prob.n)
    throw std::invalid_argument(std::string(what) + " has dimension " + std::to_string(u.size()) + ", expected " +
                                std::to_string(prob.n));
  if (!u.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite coordinates");
}

inline double evaluate_finite(const Expression& e, const Vector& u) {
  const double value = e.evaluate(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
  if (!std::isfinite(value)) throw EvaluationDomainError("expression evaluated to a non-finite value");
  return value;
}

}  // namespace detail

inline double eval_objective(const ProblemDefinition& prob, const Vector& u) {
  detail::require_point(prob, u);
  return detail::evaluate_finite(prob.objective, u);
}

struct ConstraintValues {
  Vector eq;
  Vector ineq;
};

inline ConstraintValues eval_constraints(const ProblemDefinition& prob, const Vector& u) {
  detail::require_point(prob, u);
  ConstraintValues values{Vector(static_cast<Eigen::Index>(prob.m())), Vector(static_cast<Eigen::Index>(prob.p()))};
  for (std::size_t i = 0; i < prob.m(); ++i) values.eq[static_cast<Eigen::Index>(i)] = detail::evaluate_finite(prob.eq[i], u);
  for (std::size_t i = 0; i < prob.p(); ++i)
    values.ineq[static_cast<Eigen::Index>(i)] = detail::evaluate_finite(prob.ineq[i], u);
  return values;
}

/// Default step for differentiating constraint maps at u.
inline double default_fd_step(const Vector& u) { return 1e-6 * (1.0 + (u.size() ? u.cwiseAbs().maxCoeff() : 0.0)); }

/// Central differences (f(u + h e_i) - f(u - h e_i)) / (2h).
inline Vector finite_diff_gradient(const Expression& f, const Vector& u, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("finite-difference step must be positive");
  Vector grad(u.size());
  Vector x = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    x[i] = u[i] + h;
    const double forward = detail::evaluate_finite(f, x);
    x[i] = u[i] - h;
    const double backward = detail::evaluate_finite(f, x);
    x[i] = u[i];
    grad[i] = (forward - backward) / (2.0 * h);
  }
  return grad;
}

inline Vector finite_diff_gradient(const ProblemDefinition& prob, const Vector& u, double h) {
  detail::require_point(prob, u);
  return finite_diff_gradient(prob.objective, u, h);
}

/// Left and right one-sided quotients differing by more than this mark a kink.
inline constexpr double kink_mismatch_threshold = 1e-3;

struct SampledGradient {
  Vector gradient;
  Vector evaluated_at;
  bool perturbed = false;
};

/// Central-difference gradient that steps off kinks: when some coordinate's left and
/// right quotients disagree by more than kink_mismatch_threshold, the point moves by +h
/// along x1 and the gradient is re-evaluated once there.
inline SampledGradient kink_avoiding_gradient(const Expression& f, const Vector& u, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("finite-difference step must be positive");
  const double center = detail::evaluate_finite(f, u);
  Vector grad(u.size());
  Vector x = u;
  bool kink = false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    x[i] = u[i] + h;
    const double forward = detail::evaluate_finite(f, x);
    x[i] = u[i] - h;
    const double backward = detail::evaluate_finite(f, x);
    x[i] = u[i];
    grad[i] = (forward - backward) / (2.0 * h);
    if (std::fabs((forward - center) / h - (center - backward) / h) > kink_mismatch_threshold) kink = true;
  }
  if (!kink) return {std::move(grad), u, false};
  Vector shifted = u;
  shifted[0] += h;
  return {finite_diff_gradient(f, shifted, h), std::move(shifted), true};
}

/// Empirical local Lipschitz constant on B_r(u0).
struct LipschitzEstimate {
  double radius;
  double constant;
  std::size_t sample_count;
};

/// K = max |F(u) - F(v)| / |u - v| over N sampled pairs in B_r(u0); pair i comes from substream (seed, i).
inline LipschitzEstimate estimate_lipschitz(const ProblemDefinition& prob, const Vector& u0, double r, std::size_t samples,
                                            std::uint64_t seed) {
  detail::require_point(prob, u0);
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  if (samples < 2) throw std::invalid_argument("at least two samples are required");
  double k = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    Substream rng(seed, i, StreamTag::lipschitz);
    const Vector a = rng.in_ball(u0, r);
    const Vector b = rng.in_ball(u0, r);
    const double dist = (a - b).norm();
    if (dist == 0.0) continue;
    const double q = std::fabs(detail::evaluate_finite(prob.objective, a) - detail::evaluate_finite(prob.objective, b)) / dist;
    k = std::max(k, q);
  }
  return {r, k, samples};
}

}  // namespace clarke_kkt
