#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clarke_kkt/gendir.hpp"
#include "clarke_kkt/kkt.hpp"
#include "clarke_kkt/problem.hpp"
#include "clarke_kkt/report.hpp"
#include "clarke_kkt/suite.hpp"

namespace clarke_kkt::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_failed = 1,
  exit_input_error = 2,
  exit_not_stationary = 3,
  exit_infeasible = 4,
  exit_cq_failed = 5,
};

/// Command-line configuration shared by every subcommand.
struct RunConfig {
  std::uint64_t seed = 42;
  GenDirConfig gendir{};
  SubdiffConfig subdiff{};
  StationarityTolerances tol{};
  SolverConfig solver{};
  double eps_mem = 0.05;
  std::optional<double> eps_sub;
  bool json = false;

  void validate() const {
    gendir.validate();
    if (subdiff.radius && !(*subdiff.radius > 0.0)) throw std::invalid_argument("--subdiff-radius must be positive");
    if (subdiff.count && *subdiff.count < 1) throw std::invalid_argument("--subdiff-samples must be at least 1");
    if (!(tol.stationarity >= 0.0)) throw std::invalid_argument("--eps-stat must be non-negative");
    if (!(tol.active >= 0.0)) throw std::invalid_argument("--active-tol must be non-negative");
    if (!(eps_mem >= 0.0)) throw std::invalid_argument("--eps-mem must be non-negative");
    if (eps_sub && !(*eps_sub >= 0.0)) throw std::invalid_argument("--eps-sub must be non-negative");
    if (solver.iter_cap < 1) throw std::invalid_argument("--iter-cap must be positive");
  }

  GenDirConfig gendir_config() const {
    GenDirConfig g = gendir;
    g.seed = seed;
    return g;
  }

  StationarityConfig stationarity() const {
    StationarityConfig s;
    s.tol = tol;
    s.subdiff = subdiff;
    s.subdiff.seed = seed;
    s.solver = solver;
    return s;
  }
};

/// Parses "v1,v2,...,vn".
inline Vector parse_point(std::string_view text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view item = text.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty() && item.front() == '+') item.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(value))
      throw std::invalid_argument("invalid coordinate '" + std::string(item) + "' in --at");
    values.push_back(value);
    if (comma == text.size()) break;
    pos = comma + 1;
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline ProblemDefinition load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

inline int exit_code_for(Verdict v) {
  switch (v) {
    case Verdict::stationary: return exit_ok;
    case Verdict::not_stationary: return exit_not_stationary;
    case Verdict::infeasible: return exit_infeasible;
    case Verdict::cq_failed: return exit_cq_failed;
    case Verdict::error: return exit_input_error;
  }
  return exit_input_error;
}

namespace detail {

struct Input {
  ProblemDefinition problem;
  Vector point;
};

inline std::optional<Input> load_input(const std::string& file, const std::string& at, std::ostream& err) {
  try {
    Input in{load_problem(file), {}};
    in.point = parse_point(at);
    if (static_cast<std::size_t>(in.point.size()) != in.problem.n) {
      err << "error: --at has " << in.point.size() << " coordinates but the problem has dim " << in.problem.n << "\n";
      return std::nullopt;
    }
    return in;
  } catch (const ParseError& e) {
    err << file << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return std::nullopt;
}

inline void write_json(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

}  // namespace detail

inline int cmd_analyze(const std::string& file, const std::string& at, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  }
  auto input = detail::load_input(file, at, err);
  if (!input) return exit_input_error;
  const auto scfg = cfg.stationarity();
  const auto report = verify_stationarity(input->problem, input->point, scfg);
  if (cfg.json)
    detail::write_json(out, analyze_json(input->problem, input->point, scfg, cfg.seed, report));
  else
    print_report(out, input->problem, input->point, report);
  if (report.error && !cfg.json) err << "error: stage " << report.error->stage << ": " << report.error->message << "\n";
  return exit_code_for(report.verdict);
}

inline int cmd_suite(const RunConfig& cfg, const std::optional<std::string>& export_dir, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  }
  const auto entries = registry();

  if (export_dir) {
    namespace fs = std::filesystem;
    bool ok = true;
    try {
      fs::create_directories(*export_dir);
      for (const auto& e : entries) {
        const fs::path path = fs::path(*export_dir) / (e.problem.name + ".prob");
        const std::string text = print_problem(e.problem);
        {
          std::ofstream f(path, std::ios::binary);
          f << text;
          if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
        }
        const bool same = load_problem(path.string()) == e.problem;
        ok = ok && same;
        out << path.string() << (same ? "  round-trip ok\n" : "  ROUND-TRIP MISMATCH\n");
      }
    } catch (const std::exception& ex) {
      err << "error: " << ex.what() << "\n";
      return exit_input_error;
    }
    return ok ? exit_ok : exit_failed;
  }

  const auto scfg = cfg.stationarity();
  const auto start = std::chrono::steady_clock::now();
  std::vector<SuiteOutcome> outcomes;
  for (const auto& e : entries) outcomes.push_back(run_suite_entry(e, scfg));
  const double total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  bool all = true;
  for (const auto& o : outcomes) all = all && o.pass;

  if (cfg.json) {
    detail::write_json(out, suite_json(entries, outcomes, scfg, cfg.seed, total_ms));
  } else {
    using clarke_kkt::detail::fmt_num;
    using clarke_kkt::detail::fmt_vec;
    out << std::left << std::setw(5) << "name" << std::setw(16) << "verdict" << std::setw(13) << "residual" << std::setw(14) << "z1"
        << std::setw(14) << "z2" << std::setw(12) << "mult.err" << std::setw(26) << "probes (residual >= bound)" << std::setw(7)
        << "pass" << "ms\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& o = outcomes[i];
      const auto& r = o.minimizer_report;
      std::string probes;
      for (const auto& p : o.probes) {
        if (!probes.empty()) probes += " ";
        probes += (p.report.certificate ? fmt_num(p.report.certificate->residual, 3) : std::string("-")) + ">=" +
                  fmt_num(suite_probe_slack * p.probe.residual_lower_bound, 3);
      }
      out << std::setw(5) << o.name << std::setw(16) << (std::string(to_string(r.verdict)) + (entries[i].necessary_only ? "*" : ""))
          << std::setw(13) << (r.certificate ? fmt_num(r.certificate->residual, 3) : "-") << std::setw(14)
          << (r.certificate ? fmt_vec(r.certificate->z1, 4) : "-") << std::setw(14) << (r.certificate ? fmt_vec(r.certificate->z2, 4) : "-")
          << std::setw(12) << fmt_num(o.multiplier_error, 3) << std::setw(26) << probes << std::setw(7) << (o.pass ? "yes" : "NO")
          << fmt_num(o.elapsed_ms, 4) << "\n";
    }
    out << "* stationary by certificate only: the conditions are necessary, not sufficient\n";
    out << (all ? "suite passed" : "suite FAILED") << " (" << fmt_num(total_ms, 4) << " ms)\n";
  }
  return all ? exit_ok : exit_failed;
}

inline constexpr double property_lambdas[] = {0.5, 1.0, 2.0, 10.0};
inline constexpr int property_pairs = 20;
inline constexpr double smooth_consistency_tolerance = 0.05;

/// Homogeneity and subadditivity of the estimator at a point, plus agreement with
/// the finite-difference gradient when the objective is smooth.
inline std::vector<PropertyReport> property_reports(const ProblemDefinition& prob, const Vector& u, const RunConfig& cfg) {
  const auto gcfg = cfg.gendir_config();
  const auto n = static_cast<Eigen::Index>(prob.n);
  std::vector<PropertyReport> reports;

  PropertyReport homogeneity{"homogeneity", {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      const Vector phi = sign * Vector::Unit(n, i);
      auto r = check_homogeneity(prob, u, phi, {std::begin(property_lambdas), std::end(property_lambdas)}, gcfg);
      for (auto& c : r.cases) {
        c.label = "phi=" + std::string(sign > 0 ? "+" : "-") + "e" + std::to_string(i + 1) + " " + c.label;
        homogeneity.cases.push_back(std::move(c));
      }
    }
  }
  reports.push_back(std::move(homogeneity));

  PropertyReport subadditivity{"subadditivity", {}};
  for (int j = 0; j < property_pairs; ++j) {
    Substream rng(cfg.seed, static_cast<std::uint64_t>(j), StreamTag::property_directions);
    const Vector phi1 = rng.gaussian(n);
    const Vector phi2 = rng.gaussian(n);
    auto r = check_subadditivity(prob, u, phi1, phi2, gcfg, cfg.eps_sub);
    r.cases.front().label = "pair " + std::to_string(j + 1);
    subadditivity.cases.push_back(std::move(r.cases.front()));
  }
  reports.push_back(std::move(subadditivity));

  if (prob.objective.is_smooth()) {
    PropertyReport smooth{"smooth_consistency", {}};
    const Vector grad = finite_diff_gradient(prob, u, default_fd_step(u));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (double sign : {1.0, -1.0}) {
        const Vector phi = sign * Vector::Unit(n, i);
        PropertyCase c;
        c.label = "phi=" + std::string(sign > 0 ? "+" : "-") + "e" + std::to_string(i + 1);
        c.lhs = estimate_gen_dir_deriv(prob, u, phi, gcfg).value;
        c.rhs = grad.dot(phi);
        c.gap = std::fabs(c.lhs - c.rhs);
        c.tolerance = smooth_consistency_tolerance * (1.0 + std::fabs(c.rhs));
        c.pass = c.gap <= c.tolerance;
        smooth.cases.push_back(std::move(c));
      }
    }
    reports.push_back(std::move(smooth));
  }
  return reports;
}

inline int cmd_check_properties(const std::string& file, const std::string& at, const RunConfig& cfg, std::ostream& out,
                                std::ostream& err) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  }
  auto input = detail::load_input(file, at, err);
  if (!input) return exit_input_error;

  const auto start = std::chrono::steady_clock::now();
  std::vector<PropertyReport> reports;
  try {
    reports = property_reports(input->problem, input->point, cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  }
  const double total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  bool all = true;
  for (const auto& r : reports) all = all && r.pass();

  if (cfg.json) {
    const auto g = cfg.gendir_config();
    Json props = Json::array();
    for (const auto& r : reports) props.push_back(to_json(r));
    Json j{{"version", report_version},
           {"problem", problem_summary(input->problem)},
           {"point", to_json(input->point)},
           {"config",
            {{"seed", cfg.seed},
             {"gendir",
              {{"levels", g.levels},
               {"base_radius", g.base_radius},
               {"base_step", g.base_step},
               {"decay", g.decay},
               {"samples_per_level", g.samples_per_level}}},
             {"eps_sub", cfg.eps_sub ? Json(*cfg.eps_sub) : Json("default")}}},
           {"properties", std::move(props)},
           {"pass", all},
           {"timings", {{"total_ms", total_ms}}}};
    detail::write_json(out, j);
  } else {
    using clarke_kkt::detail::fmt_num;
    for (const auto& r : reports) {
      out << r.property << ": " << (r.pass() ? "pass" : "FAIL") << "\n";
      for (const auto& c : r.cases)
        out << "  " << std::left << std::setw(24) << c.label << " lhs=" << std::setw(13) << fmt_num(c.lhs, 8) << " rhs=" << std::setw(13)
            << fmt_num(c.rhs, 8) << " gap=" << std::setw(13) << fmt_num(c.gap, 3) << " tol=" << std::setw(11) << fmt_num(c.tolerance, 3)
            << (c.pass ? "" : "  FAIL") << "\n";
    }
    out << (all ? "all properties hold" : "some properties FAILED") << "\n";
  }
  return all ? exit_ok : exit_failed;
}

}  // namespace clarke_kkt::cli
