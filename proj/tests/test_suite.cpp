#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "test_support.hpp"

using namespace clarke_kkt;

TEST(Registry, HasTheFiveEntriesWithNotes) {
  const auto entries = registry();
  ASSERT_GE(entries.size(), 5u);
  std::set<std::string> names;
  for (const auto& e : entries) {
    names.insert(e.problem.name);
    EXPECT_FALSE(e.notes.empty()) << e.problem.name;
    EXPECT_FALSE(e.probes.empty()) << e.problem.name;
    for (const auto& probe : e.probes) EXPECT_FALSE(probe.note.empty()) << e.problem.name;
  }
  for (const char* n : {"P1", "P2", "P3", "P4", "P5"}) EXPECT_TRUE(names.count(n)) << n;
  EXPECT_TRUE(testing_support::suite_entry("P5").necessary_only);
}

TEST(Registry, RegisteredPointsAndProbesAreFeasible) {
  for (const auto& e : registry()) {
    auto check = [&](const Vector& u, double tol) {
      const auto c = eval_constraints(e.problem, u);
      if (c.eq.size()) {
        EXPECT_LE(c.eq.cwiseAbs().maxCoeff(), tol) << e.problem.name;
      }
      if (c.ineq.size()) {
        EXPECT_LE(c.ineq.maxCoeff(), tol) << e.problem.name;
      }
    };
    check(e.minimizer, 1e-9);
    for (const auto& probe : e.probes) check(probe.point, 1e-6);
  }
}

TEST(Registry, ExportedFilesParseBackIdentically) {
  for (const auto& e : registry()) {
    const auto back = parse_problem(print_problem(e.problem));
    EXPECT_TRUE(back == e.problem) << print_problem(e.problem);
  }
}

// Independent hand values: the expected multipliers solve u* + J^T z = 0 for the
// vertices listed in each derivation.
TEST(Registry, ExpectedMultipliersMatchHandDerivations) {
  EXPECT_EQ(*testing_support::suite_entry("P2").expected_z1, testing_support::vec({-0.5}));
  EXPECT_EQ(*testing_support::suite_entry("P3").expected_z2, testing_support::vec({1.0}));
  EXPECT_EQ(*testing_support::suite_entry("P4").expected_z1, testing_support::vec({1.0}));
  EXPECT_NEAR(testing_support::suite_entry("P2").probes[0].residual_lower_bound, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(testing_support::suite_entry("P4").probes[0].residual_lower_bound, std::sqrt(2.0), 1e-15);
}

TEST(Suite, EveryEntryPassesAtDefaults) {
  for (const auto& e : registry()) {
    const auto o = run_suite_entry(e, StationarityConfig{});
    EXPECT_TRUE(o.pass) << e.problem.name;
    EXPECT_EQ(o.minimizer_report.verdict, Verdict::stationary) << e.problem.name;
    EXPECT_LE(o.multiplier_error, suite_multiplier_tolerance) << e.problem.name;
    for (const auto& p : o.probes) {
      EXPECT_EQ(p.report.verdict, Verdict::not_stationary) << e.problem.name;
      ASSERT_TRUE(p.report.certificate);
      EXPECT_GE(p.report.certificate->residual, suite_probe_slack * p.probe.residual_lower_bound) << e.problem.name;
    }
  }
}

TEST(Suite, CertificatesSatisfySignAndSlackness) {
  for (const auto& o : run_suite(StationarityConfig{})) {
    const auto& c = *o.minimizer_report.certificate;
    EXPECT_GE(c.lambda.minCoeff(), -1e-12);
    EXPECT_NEAR(c.lambda.sum(), 1.0, 1e-12);
    if (c.z2.size()) {
      EXPECT_GE(c.z2.minCoeff(), -1e-12);
      EXPECT_LE(std::fabs(c.slackness), 1e-6 * c.z2.lpNorm<1>());
    }
  }
}
