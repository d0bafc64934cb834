#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "clarke_kkt/cli.hpp"

namespace {

void add_common_options(CLI::App& cmd, clarke_kkt::cli::RunConfig& cfg, std::optional<std::uint64_t>& seed) {
  cmd.add_option("--seed", seed, "Sampling seed (falls back to $CLARKE_KKT_SEED, then 42)");
  cmd.add_flag("--json", cfg.json, "Emit a JSON report instead of text");
  cmd.add_option("--eps-stat", cfg.tol.stationarity, "Stationarity residual threshold")->capture_default_str();
  cmd.add_option("--active-tol", cfg.tol.active, "Inequality activity threshold")->capture_default_str();
  cmd.add_option("--eps-mem", cfg.eps_mem, "Membership test tolerance")->capture_default_str();
  cmd.add_option("--eps-sub", cfg.eps_sub, "Subadditivity tolerance (default 0.05 (1 + |phi1| + |phi2|))");
  cmd.add_option("--levels", cfg.gendir.levels, "Scales of the directional-derivative estimator")->capture_default_str();
  cmd.add_option("--samples", cfg.gendir.samples_per_level, "Base points per scale")->capture_default_str();
  cmd.add_option("--radius", cfg.gendir.base_radius, "Base-point radius at scale 0")->capture_default_str();
  cmd.add_option("--step", cfg.gendir.base_step, "Largest step at scale 0")->capture_default_str();
  cmd.add_option("--decay", cfg.gendir.decay, "Per-scale shrink factor")->capture_default_str();
  cmd.add_option("--subdiff-radius", cfg.subdiff.radius, "Gradient sampling radius (default 1e-3 (1 + |u|_inf))");
  cmd.add_option("--subdiff-samples", cfg.subdiff.count, "Number of sampled gradients (default 30 + 2n)");
  cmd.add_option("--iter-cap", cfg.solver.iter_cap, "Multiplier solver iteration cap")->capture_default_str();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  if (const char* env = std::getenv("CLARKE_KKT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring invalid CLARKE_KKT_SEED='" << env << "'\n";
    }
  }
  return 42;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = clarke_kkt::cli;
  CLI::App app{"Generalized-gradient stationarity and multiplier certificates for nonsmooth constrained problems"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  std::optional<std::uint64_t> seed;
  std::string file;
  std::string at;
  std::optional<std::string> export_dir;

  auto* analyze = app.add_subcommand("analyze", "Check the multiplier conditions at a candidate point");
  analyze->add_option("file", file, "Problem file")->required();
  analyze->add_option("--at", at, "Candidate point, comma-separated")->required();
  add_common_options(*analyze, cfg, seed);

  auto* suite = app.add_subcommand("suite", "Run the built-in ground-truth problems");
  suite->add_option("--export", export_dir, "Write the suite problems as problem files into DIR");
  add_common_options(*suite, cfg, seed);

  auto* props = app.add_subcommand("check-properties", "Check homogeneity and subadditivity of the directional-derivative estimate");
  props->add_option("file", file, "Problem file")->required();
  props->add_option("--at", at, "Point, comma-separated")->required();
  add_common_options(*props, cfg, seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::exit_input_error;
  }
  cfg.seed = resolve_seed(seed);

  if (analyze->parsed()) return cli::cmd_analyze(file, at, cfg, std::cout, std::cerr);
  if (suite->parsed()) return cli::cmd_suite(cfg, export_dir, std::cout, std::cerr);
  return cli::cmd_check_properties(file, at, cfg, std::cout, std::cerr);
}
