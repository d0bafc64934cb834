#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "clarke_kkt/kkt.hpp"
#include "clarke_kkt/problem.hpp"

namespace clarke_kkt {

/// A feasible point that must not certify as stationary, with a hand-derived lower
/// bound on its best achievable residual.
struct SuiteProbe {
  Vector point;
  double residual_lower_bound;
  std::string note;
};

struct SuiteEntry {
  ProblemDefinition problem;
  Vector minimizer;
  std::optional<Vector> expected_z1;
  std::optional<Vector> expected_z2;
  std::vector<SuiteProbe> probes;
  std::string notes;
  // The registered point satisfies the necessary conditions without being a minimizer.
  bool necessary_only = false;
};

namespace detail {

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace detail

/// Ground-truth problems with hand-derived subdifferentials and multipliers.
inline std::vector<SuiteEntry> registry() {
  using detail::vec;
  std::vector<SuiteEntry> entries;

  entries.push_back({
      parse_problem("name P1\ndim 1\nobjective abs(x1)\n"),
      vec({0.0}),
      Vector(0),
      Vector(0),
      {{vec({0.5}), 1.0, "F is smooth near 0.5 with gradient 1 and there are no multipliers: residual 1"}},
      "Unconstrained |x1|. The sampled gradients are +1 and -1, the hull is [-1, 1] and contains 0, "
      "so the certificate has residual 0 with lambda splitting its weight between the two signs.",
  });

  entries.push_back({
      parse_problem("name P2\ndim 2\nobjective max(x1, x2)\neq x1 + x2\n"),
      vec({0.0, 0.0}),
      vec({-0.5}),
      Vector(0),
      {{vec({1.0, -1.0}), 1.0 / std::sqrt(2.0),
        "gradient (1, 0); min over z1 of |(1, 0) + z1 (1, 1)| is attained at z1 = -1/2 with value 1/sqrt(2)"}},
      "max(x1, x2) on x1 + x2 = 0. The subdifferential at the origin is conv{(1, 0), (0, 1)}; "
      "u* + z1 (1, 1) = 0 forces u* = (1/2, 1/2) and z1 = -1/2.",
  });

  entries.push_back({
      parse_problem("name P3\ndim 2\nobjective abs(x1) + x2\nineq -x2\n"),
      vec({0.0, 0.0}),
      Vector(0),
      vec({1.0}),
      {{vec({0.0, 1.0}), 1.0,
        "inequality inactive (value -1), gradients (+-1, 1) cannot be cancelled: best residual |(0, 1)| = 1"}},
      "|x1| + x2 subject to -x2 <= 0. The subdifferential at the origin is [-1, 1] x {1}; "
      "(u1, 1) + z2 (0, -1) = 0 gives u1 = 0 and z2 = 1, and the active constraint makes <G2, z2> = 0.",
  });

  entries.push_back({
      parse_problem("name P4\ndim 2\nobjective pow(x1 - 1, 2) + pow(x2, 2)\neq x1 + x2\n"),
      vec({0.5, -0.5}),
      vec({1.0}),
      Vector(0),
      {{vec({0.0, 0.0}), std::sqrt(2.0), "gradient (-2, 0); min over z1 of |(-2 + z1, z1)| is sqrt(2) at z1 = 1"}},
      "Smooth control. The gradient (2 (x1 - 1), 2 x2) at (1/2, -1/2) is (-1, -1), and (-1, -1) + z1 (1, 1) = 0 gives z1 = 1.",
  });

  entries.push_back({
      parse_problem("name P5\ndim 1\nobjective -abs(x1)\n"),
      vec({0.0}),
      Vector(0),
      Vector(0),
      {{vec({0.5}), 1.0, "gradient -1 near 0.5 and no multipliers: residual 1"}},
      "-|x1| at 0 is a local maximum, not a minimum. H_0(phi) = |phi| and 0 lies in the generalized "
      "sub-gradient set [-1, 1], so the point certifies as stationary: the multiplier conditions are "
      "necessary for optimality, not sufficient.",
      true,
  });

  return entries;
}

struct ProbeOutcome {
  SuiteProbe probe;
  StationarityReport report;
  bool pass = false;
};

struct SuiteOutcome {
  std::string name;
  StationarityReport minimizer_report;
  double multiplier_error = 0.0;  // max componentwise |recovered - expected|
  std::vector<ProbeOutcome> probes;
  bool pass = false;
  double elapsed_ms = 0.0;
};

inline constexpr double suite_multiplier_tolerance = 0.05;
inline constexpr double suite_probe_slack = 0.8;

namespace detail {

inline double max_abs_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace detail

/// Runs verify_stationarity on each entry's registered point and probes and compares
/// against the recorded expectations.
inline SuiteOutcome run_suite_entry(const SuiteEntry& entry, const StationarityConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  SuiteOutcome out;
  out.name = entry.problem.name;
  out.minimizer_report = verify_stationarity(entry.problem, entry.minimizer, cfg);
  bool pass = out.minimizer_report.verdict == Verdict::stationary;
  if (out.minimizer_report.certificate) {
    const auto& cert = *out.minimizer_report.certificate;
    if (entry.expected_z1) out.multiplier_error = std::max(out.multiplier_error, detail::max_abs_diff(cert.z1, *entry.expected_z1));
    if (entry.expected_z2) out.multiplier_error = std::max(out.multiplier_error, detail::max_abs_diff(cert.z2, *entry.expected_z2));
    pass = pass && out.multiplier_error <= suite_multiplier_tolerance;
  }
  for (const auto& probe : entry.probes) {
    ProbeOutcome po{probe, verify_stationarity(entry.problem, probe.point, cfg), false};
    po.pass = po.report.verdict == Verdict::not_stationary && po.report.certificate &&
              po.report.certificate->residual >= suite_probe_slack * probe.residual_lower_bound;
    pass = pass && po.pass;
    out.probes.push_back(std::move(po));
  }
  out.pass = pass;
  out.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline std::vector<SuiteOutcome> run_suite(const StationarityConfig& cfg) {
  std::vector<SuiteOutcome> outcomes;
  for (const auto& entry : registry()) outcomes.push_back(run_suite_entry(entry, cfg));
  return outcomes;
}

}  // namespace clarke_kkt
