#pragma once

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clarke_kkt/gendir.hpp"
#include "clarke_kkt/kkt.hpp"
#include "clarke_kkt/suite.hpp"

namespace clarke_kkt {

using Json = nlohmann::ordered_json;

inline constexpr const char* report_version = "1.0";

inline Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Json to_json(const Feasibility& f) {
  return Json{{"eq_norm", f.eq_norm}, {"max_ineq_violation", f.max_ineq_violation}};
}

// Indices are reported 1-based, matching constraint order in the problem file.
inline Json to_json(const ConstraintQualificationReport& cq) {
  Json active = Json::array();
  for (auto i : cq.active_set) active.push_back(i + 1);
  return Json{{"j1_rank", cq.j1_rank},
              {"j1_onto", cq.j1_onto},
              {"slater_direction", cq.slater_direction ? to_json(*cq.slater_direction) : Json(nullptr)},
              {"slater_ok", cq.slater_ok},
              {"active_set", active}};
}

inline Json to_json(const MultiplierCertificate& c) {
  return Json{{"u_star", to_json(c.u_star)}, {"lambda", to_json(c.lambda)}, {"z1", to_json(c.z1)},
              {"z2", to_json(c.z2)},         {"residual", c.residual},      {"slackness", c.slackness},
              {"converged", c.converged},    {"iterations", c.iterations}};
}

inline Json to_json(const StageTimings& t) {
  return Json{{"feasibility_ms", t.feasibility_ms},
              {"cq_ms", t.cq_ms},
              {"subdiff_ms", t.subdiff_ms},
              {"multipliers_ms", t.multipliers_ms},
              {"total_ms", t.total_ms}};
}

inline Json problem_summary(const ProblemDefinition& prob) {
  return Json{{"name", prob.name}, {"n", prob.n}, {"m", prob.m()}, {"p", prob.p()}};
}

inline Json config_json(const StationarityConfig& cfg, std::uint64_t seed) {
  return Json{{"seed", seed},
              {"subdiff", {{"radius", cfg.subdiff.radius ? Json(*cfg.subdiff.radius) : Json("default")},
                           {"count", cfg.subdiff.count ? Json(*cfg.subdiff.count) : Json("default")}}},
              {"solver", {{"iter_cap", cfg.solver.iter_cap}, {"tol", cfg.solver.tol}}},
              {"tolerances",
               {{"eps_stat", cfg.tol.stationarity}, {"active_tol", cfg.tol.active}, {"feasibility", cfg.tol.feasibility}}}};
}

/// Report body without version/problem/config/timings, shared by analyze and suite output.
inline Json report_body(const StationarityReport& r) {
  return Json{{"feasibility", to_json(r.feasibility)},
              {"cq", r.cq ? to_json(*r.cq) : Json(nullptr)},
              {"certificate", r.certificate ? to_json(*r.certificate) : Json(nullptr)},
              {"verdict", to_string(r.verdict)},
              {"error", r.error ? Json{{"stage", r.error->stage}, {"message", r.error->message}} : Json(nullptr)}};
}

/// Single-object analyze report; field order is fixed.
inline Json analyze_json(const ProblemDefinition& prob, const Vector& point, const StationarityConfig& cfg, std::uint64_t seed,
                         const StationarityReport& r) {
  Json out{{"version", report_version}, {"problem", problem_summary(prob)}, {"point", to_json(point)}, {"config", config_json(cfg, seed)}};
  const Json body = report_body(r);
  for (const auto& [key, value] : body.items()) out[key] = value;
  out["timings"] = to_json(r.timings);
  return out;
}

inline Json to_json(const PropertyReport& p) {
  Json cases = Json::array();
  for (const auto& c : p.cases)
    cases.push_back(Json{{"label", c.label}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"gap", c.gap}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  return Json{{"property", p.property}, {"pass", p.pass()}, {"worst_gap", p.cases.empty() ? Json(nullptr) : Json(p.worst_gap())},
              {"cases", cases}};
}

inline Json suite_json(const std::vector<SuiteEntry>& entries, const std::vector<SuiteOutcome>& outcomes,
                       const StationarityConfig& cfg, std::uint64_t seed, double total_ms) {
  Json list = Json::array();
  bool all = true;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const auto& e = entries[i];
    all = all && o.pass;
    Json probes = Json::array();
    for (const auto& p : o.probes) {
      Json pj{{"point", to_json(p.probe.point)}, {"residual_lower_bound", p.probe.residual_lower_bound}};
      const Json body = report_body(p.report);
      for (const auto& [key, value] : body.items()) pj[key] = value;
      pj["pass"] = p.pass;
      pj["timings"] = to_json(p.report.timings);
      probes.push_back(std::move(pj));
    }
    Json minimizer{{"point", to_json(e.minimizer)}};
    const Json body = report_body(o.minimizer_report);
    for (const auto& [key, value] : body.items()) minimizer[key] = value;
    minimizer["timings"] = to_json(o.minimizer_report.timings);
    list.push_back(Json{{"name", o.name},
                        {"problem", print_problem(e.problem)},
                        {"necessary_only", e.necessary_only},
                        {"expected_z1", e.expected_z1 ? to_json(*e.expected_z1) : Json(nullptr)},
                        {"expected_z2", e.expected_z2 ? to_json(*e.expected_z2) : Json(nullptr)},
                        {"multiplier_error", o.multiplier_error},
                        {"minimizer", std::move(minimizer)},
                        {"probes", std::move(probes)},
                        {"pass", o.pass},
                        {"notes", e.notes},
                        {"timings", {{"total_ms", o.elapsed_ms}}}});
  }
  return Json{{"version", report_version},
              {"config", config_json(cfg, seed)},
              {"entries", std::move(list)},
              {"pass", all},
              {"timings", {{"total_ms", total_ms}}}};
}

/// Removes every "timings" member, recursively; what remains is reproducible for a fixed seed.
inline Json strip_timings(Json j) {
  if (j.is_object()) {
    j.erase("timings");
    for (auto& [key, value] : j.items()) value = strip_timings(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_timings(value);
  }
  return j;
}

namespace detail {

inline std::string fmt_vec(const Vector& v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

inline std::string fmt_num(double x, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

}  // namespace detail

inline void print_report(std::ostream& os, const ProblemDefinition& prob, const Vector& point, const StationarityReport& r) {
  using detail::fmt_num;
  using detail::fmt_vec;
  os << "problem   " << prob.name << "  (n=" << prob.n << ", m=" << prob.m() << ", p=" << prob.p() << ")\n";
  os << "point     " << fmt_vec(point, 17) << "\n";
  os << "feasible  |G1|_inf=" << fmt_num(r.feasibility.eq_norm) << "  max G2 violation=" << fmt_num(r.feasibility.max_ineq_violation)
     << "\n";
  if (r.cq) {
    os << "cq        rank(J1)=" << r.cq->j1_rank << (r.cq->j1_onto ? " (onto)" : " (not onto)")
       << "  slater=" << (r.cq->slater_ok ? "ok" : "failed");
    if (r.cq->slater_direction && r.cq->slater_ok && !r.cq->active_set.empty()) os << " phi0=" << fmt_vec(*r.cq->slater_direction);
    os << "  active={";
    for (std::size_t i = 0; i < r.cq->active_set.size(); ++i) os << (i ? "," : "") << r.cq->active_set[i] + 1;
    os << "}\n";
  }
  if (r.certificate) {
    const auto& c = *r.certificate;
    os << "certificate u*=" << fmt_vec(c.u_star) << "  z1=" << fmt_vec(c.z1) << "  z2=" << fmt_vec(c.z2) << "\n";
    os << "            residual=" << fmt_num(c.residual) << "  slackness=" << fmt_num(c.slackness)
       << "  samples=" << r.subdiff_samples << "  iterations=" << c.iterations << (c.converged ? "" : " (not converged)") << "\n";
  }
  if (r.error) os << "error     stage " << r.error->stage << ": " << r.error->message << "\n";
  os << "verdict   " << to_string(r.verdict) << "\n";
}

}  // namespace clarke_kkt
