#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace clarke_kkt;
using testing_support::problem;
using testing_support::vec;

TEST(Jacobians, Examples) {
  const auto eq = jacobians(problem("dim 2\nobjective 0\neq x1 + x2"), vec({0.3, 2.0}));
  ASSERT_EQ(eq.eq.rows(), 1);
  ASSERT_EQ(eq.eq.cols(), 2);
  EXPECT_NEAR(eq.eq(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(eq.eq(0, 1), 1.0, 1e-9);

  const auto in = jacobians(problem("dim 2\nobjective 0\nineq -x2"), vec({0.0, 0.0}));
  ASSERT_EQ(in.ineq.rows(), 1);
  EXPECT_NEAR(in.ineq(0, 0), 0.0, 1e-9);
  EXPECT_NEAR(in.ineq(0, 1), -1.0, 1e-9);

  const auto none = jacobians(problem("dim 3\nobjective x1"), vec({1.0, 2.0, 3.0}));
  EXPECT_EQ(none.eq.rows(), 0);
  EXPECT_EQ(none.eq.cols(), 3);
  EXPECT_EQ(none.ineq.rows(), 0);
  EXPECT_EQ(none.ineq.cols(), 3);
}

TEST(JacobianLipschitz, Examples) {
  for (const Vector& u0 : {vec({0.0, 0.0}), vec({5.0, -3.0})})
    EXPECT_LE(check_jacobian_lipschitz(problem("dim 2\nobjective 0\neq x1 + x2"), u0, 0.1, 50, 42), 1e-6);
  // J(x) = 2x, so |J(phi) - J(0)| / |phi| = 2 for every perturbation.
  const double k = check_jacobian_lipschitz(problem("dim 1\nobjective 0\neq pow(x1, 2)"), vec({0.0}), 0.1, 50, 42);
  EXPECT_GE(k, 1.5);
  EXPECT_LE(k, 2.5);
  EXPECT_EQ(check_jacobian_lipschitz(problem("dim 2\nobjective x1\nineq x2"), vec({0.0, 0.0}), 0.1, 50, 42), 0.0);
  EXPECT_THROW(check_jacobian_lipschitz(problem("dim 1\nobjective 0\neq x1"), vec({0.0}), 0.0, 5, 1), std::invalid_argument);
}

TEST(ConstraintQualification, OntoEquality) {
  const auto cq = check_constraint_qualification(problem("dim 2\nobjective 0\neq x1 + x2"), vec({0.0, 0.0}));
  EXPECT_EQ(cq.j1_rank, 1);
  EXPECT_TRUE(cq.j1_onto);
  EXPECT_TRUE(cq.slater_ok);
  EXPECT_TRUE(cq.active_set.empty());
}

TEST(ConstraintQualification, DependentEqualities) {
  const auto cq = check_constraint_qualification(problem("dim 2\nobjective 0\neq x1\neq 2*x1"), vec({0.0, 0.0}));
  EXPECT_EQ(cq.j1_rank, 1);
  EXPECT_FALSE(cq.j1_onto);
}

TEST(ConstraintQualification, SlaterDirectionForActiveInequality) {
  const auto cq = check_constraint_qualification(problem("dim 2\nobjective 0\nineq -x2"), vec({0.0, 0.0}));
  ASSERT_EQ(cq.active_set.size(), 1u);
  EXPECT_EQ(cq.active_set[0], 0u);
  ASSERT_TRUE(cq.slater_ok);
  ASSERT_TRUE(cq.slater_direction);
  EXPECT_NEAR((*cq.slater_direction)[0], 0.0, 1e-6);
  EXPECT_GE((*cq.slater_direction)[1], 1.0 - 1e-8);
}

TEST(ConstraintQualification, SlaterRespectsEqualitiesAndBox) {
  // Active at the origin: -x1 and x3 - x2. A certificate is e.g. (1, 0, -1).
  const auto p = problem("dim 3\nobjective 0\neq x1 + x2 + x3\nineq -x1\nineq x2 - 1\nineq x3 - x2");
  const Vector u0 = vec({0.0, 0.0, 0.0});
  const auto cq = check_constraint_qualification(p, u0);
  EXPECT_EQ(cq.active_set, (std::vector<std::size_t>{0, 2}));
  ASSERT_TRUE(cq.slater_ok);
  const auto jac = jacobians(p, u0);
  const Vector phi = *cq.slater_direction;
  EXPECT_LE((jac.eq * phi).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((jac.ineq.row(0) * phi)(0), -1.0 + 1e-8);
  EXPECT_LE((jac.ineq.row(2) * phi)(0), -1.0 + 1e-8);
  EXPECT_LE(phi.cwiseAbs().maxCoeff(), 1e3);
}

TEST(ConstraintQualification, OpposingActiveInequalitiesHaveNoSlaterDirection) {
  const auto cq = check_constraint_qualification(problem("dim 2\nobjective 0\nineq x2\nineq -x2"), vec({0.0, 0.0}));
  EXPECT_EQ(cq.active_set.size(), 2u);
  EXPECT_FALSE(cq.slater_ok);
}

TEST(ConstraintQualification, InactiveInequalitiesAreIgnored) {
  const auto cq = check_constraint_qualification(problem("dim 2\nobjective 0\nineq x2 - 1\nineq -x2 - 1"), vec({0.0, 0.0}));
  EXPECT_TRUE(cq.active_set.empty());
  EXPECT_TRUE(cq.slater_ok);
  ASSERT_TRUE(cq.slater_direction);
  EXPECT_EQ(*cq.slater_direction, Vector::Zero(2));
}

TEST(RecoverMultipliers, MaxOnHyperplane) {
  const auto p = problem("dim 2\nobjective max(x1, x2)\neq x1 + x2");
  const Vector u0 = vec({0.0, 0.0});
  const auto cert = recover_multipliers(p, u0, sample_subdifferential(p, u0), jacobians(p, u0), {});
  EXPECT_LE(cert.residual, 1e-3);
  EXPECT_NEAR(cert.z1[0], -0.5, 0.05);
  EXPECT_NEAR(cert.u_star[0], 0.5, 0.05);
  EXPECT_NEAR(cert.u_star[1], 0.5, 0.05);
  EXPECT_GE(cert.lambda.minCoeff(), -1e-12);
  EXPECT_NEAR(cert.lambda.sum(), 1.0, 1e-12);
}

TEST(RecoverMultipliers, ActiveInequality) {
  const auto p = problem("dim 2\nobjective abs(x1) + x2\nineq -x2");
  const Vector u0 = vec({0.0, 0.0});
  const auto cert = recover_multipliers(p, u0, sample_subdifferential(p, u0), jacobians(p, u0), {0});
  EXPECT_LE(cert.residual, 1e-3);
  EXPECT_NEAR(cert.z2[0], 1.0, 0.05);
  EXPECT_EQ(cert.slackness, 0.0);
}

TEST(RecoverMultipliers, InactiveComponentsStayZero) {
  const auto p = problem("dim 2\nobjective abs(x1) + x2\nineq x1 - 5\nineq -x2\nineq x2 - 3");
  const Vector u0 = vec({0.0, 0.0});
  const auto cert = recover_multipliers(p, u0, sample_subdifferential(p, u0), jacobians(p, u0), {1});
  ASSERT_EQ(cert.z2.size(), 3);
  EXPECT_EQ(cert.z2[0], 0.0);
  EXPECT_EQ(cert.z2[2], 0.0);
  EXPECT_GE(cert.z2[1], -1e-12);
  EXPECT_LE(std::fabs(cert.slackness), 1e-6 * cert.z2.lpNorm<1>());
  EXPECT_THROW(recover_multipliers(p, u0, sample_subdifferential(p, u0), jacobians(p, u0), {3}), std::invalid_argument);
}

TEST(RecoverMultipliers, UnconstrainedSmoothPointHasUnitResidual) {
  const auto p = problem("dim 1\nobjective abs(x1)");
  const Vector u0 = vec({0.5});
  const auto cert = recover_multipliers(p, u0, sample_subdifferential(p, u0), jacobians(p, u0), {});
  EXPECT_NEAR(cert.residual, 1.0, 0.05);
}

TEST(RecoverMultipliers, EmptySampleIsAnEstimationFailure) {
  const auto p = problem("dim 1\nobjective abs(x1)");
  EXPECT_THROW(recover_multipliers(p, vec({0.0}), SubdifferentialApprox{}, jacobians(p, vec({0.0})), {}), EstimationFailure);
}

TEST(VerifyStationarity, SuiteMaxProblem) {
  const auto p = testing_support::suite_entry("P2").problem;
  const auto stationary = verify_stationarity(p, vec({0.0, 0.0}));
  EXPECT_EQ(stationary.verdict, Verdict::stationary);
  ASSERT_TRUE(stationary.certificate);
  EXPECT_LE(stationary.certificate->residual, 1e-2);

  // F is smooth at (1, -1) with gradient (1, 0); the best residual is 1/sqrt(2).
  const auto probe = verify_stationarity(p, vec({1.0, -1.0}));
  EXPECT_EQ(probe.verdict, Verdict::not_stationary);
  ASSERT_TRUE(probe.certificate);
  EXPECT_GE(probe.certificate->residual, 0.1);
  EXPECT_NEAR(probe.certificate->residual, 1.0 / std::sqrt(2.0), 1e-3);

  const auto infeasible = verify_stationarity(p, vec({1.0, 0.0}));
  EXPECT_EQ(infeasible.verdict, Verdict::infeasible);
  EXPECT_NEAR(infeasible.feasibility.eq_norm, 1.0, 1e-12);
  EXPECT_FALSE(infeasible.certificate);
}

TEST(VerifyStationarity, InequalityViolation) {
  const auto r = verify_stationarity(problem("dim 1\nobjective x1\nineq 1 - x1"), vec({0.5}));
  EXPECT_EQ(r.verdict, Verdict::infeasible);
  EXPECT_DOUBLE_EQ(r.feasibility.max_ineq_violation, 0.5);
}

TEST(VerifyStationarity, ConstraintQualificationFailure) {
  const auto r = verify_stationarity(problem("dim 2\nobjective x1 + x2\neq x1\neq 2*x1"), vec({0.0, 0.0}));
  EXPECT_EQ(r.verdict, Verdict::cq_failed);
  ASSERT_TRUE(r.cq);
  EXPECT_FALSE(r.cq->j1_onto);
}

TEST(VerifyStationarity, StageErrorsAreRecorded) {
  const auto feas = verify_stationarity(problem("dim 1\nobjective x1\neq x1 / x1"), vec({0.0}));
  EXPECT_EQ(feas.verdict, Verdict::error);
  ASSERT_TRUE(feas.error);
  EXPECT_EQ(feas.error->stage, "feasibility");

  const auto exact = verify_stationarity(problem("dim 1\nobjective 1 / x1"), vec({0.0}));
  EXPECT_EQ(exact.verdict, Verdict::error);
  ASSERT_TRUE(exact.error);
  EXPECT_EQ(exact.error->stage, "subdifferential");
}

TEST(VerifyStationarity, StationaryVerdictImpliesHypotheses) {
  for (const auto& e : registry()) {
    const auto r = verify_stationarity(e.problem, e.minimizer);
    ASSERT_EQ(r.verdict, Verdict::stationary) << e.problem.name;
    EXPECT_LE(r.certificate->residual, 1e-2);
    EXPECT_LE(r.feasibility.eq_norm, 1e-6);
    EXPECT_LE(r.feasibility.max_ineq_violation, 1e-6);
    EXPECT_TRUE(r.cq->j1_onto);
    EXPECT_TRUE(r.cq->slater_ok);
    EXPECT_EQ(r.subdiff_samples, 30 + 2 * e.problem.n);
  }
}
