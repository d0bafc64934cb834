#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace clarke_kkt;
using testing_support::problem;
using testing_support::vec;

TEST(FiniteDifference, Examples) {
  const Vector sq = finite_diff_gradient(problem("dim 1\nobjective pow(x1, 2)"), vec({1.0}), 1e-6);
  EXPECT_NEAR(sq[0], 2.0, 1e-6);
  const Vector ab = finite_diff_gradient(problem("dim 1\nobjective abs(x1)"), vec({0.5}), 1e-6);
  EXPECT_NEAR(ab[0], 1.0, 1e-9);
  const Vector c = finite_diff_gradient(problem("dim 3\nobjective 7"), vec({1.0, -2.0, 5.0}), 1e-6);
  EXPECT_EQ(c, Vector::Zero(3));
}

TEST(FiniteDifference, RejectsBadStepAndPropagatesDomainErrors) {
  const auto p = problem("dim 1\nobjective 1 / x1");
  EXPECT_THROW(finite_diff_gradient(p, vec({1.0}), 0.0), std::invalid_argument);
  EXPECT_THROW(finite_diff_gradient(p, vec({1e-7}), 1e-7), EvaluationDomainError);
}

// Affine functions with dyadic coefficients at dyadic points, and power-of-two steps
// spanning [1e-8, 1e-4], so the stencil arithmetic itself introduces no rounding.
TEST(FiniteDifference, AffineGradientIsCoefficientVector) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> numer(-64, 64);
  for (int trial = 0; trial < 40; ++trial) {
    const double a1 = numer(gen) / 16.0;
    const double a2 = numer(gen) / 16.0;
    const double a3 = numer(gen) / 16.0;
    const double c = numer(gen) / 8.0;
    std::ostringstream text;
    text << "dim 3\nobjective " << a1 << "*x1 + " << a2 << "*x2 - " << -a3 << "*x3 + " << c;
    const auto p = problem(text.str());
    const Vector u = vec({numer(gen) / 4.0, numer(gen) / 4.0, numer(gen) / 4.0});
    for (int e = -26; e <= -14; ++e) {
      const double h = std::ldexp(1.0, e);
      const Vector g = finite_diff_gradient(p, u, h);
      EXPECT_NEAR(g[0], a1, 1e-9) << text.str() << " h=" << h;
      EXPECT_NEAR(g[1], a2, 1e-9) << text.str() << " h=" << h;
      EXPECT_NEAR(g[2], a3, 1e-9) << text.str() << " h=" << h;
    }
  }
}

TEST(KinkAvoidance, GradientAtKinkIsShifted) {
  const auto f = parse_expression("abs(x1) + abs(x2)");
  const auto s = kink_avoiding_gradient(f, vec({0.0, 0.5}), 1e-5);
  EXPECT_TRUE(s.perturbed);
  EXPECT_EQ(s.evaluated_at[0], 1e-5);
  EXPECT_NEAR(s.gradient[0], 1.0, 1e-9);
  EXPECT_NEAR(s.gradient[1], 1.0, 1e-9);

  const auto smooth = kink_avoiding_gradient(f, vec({0.3, 0.5}), 1e-5);
  EXPECT_FALSE(smooth.perturbed);
  EXPECT_EQ(smooth.evaluated_at, vec({0.3, 0.5}));
}

TEST(Lipschitz, AbsoluteValue) {
  const auto p = problem("dim 1\nobjective abs(x1)");
  const auto est = estimate_lipschitz(p, vec({0.0}), 1.0, 100, 42);
  EXPECT_LE(est.constant, 1.0 + 1e-12);
  EXPECT_GE(est.constant, 0.5);
  EXPECT_EQ(est.sample_count, 100u);
  EXPECT_EQ(est.radius, 1.0);

  // Brute-force enumeration of the same pairs, straight from the generator.
  double brute = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Substream rng(42, i, StreamTag::lipschitz);
    const Vector a = rng.in_ball(vec({0.0}), 1.0);
    const Vector b = rng.in_ball(vec({0.0}), 1.0);
    if (a[0] != b[0]) brute = std::max(brute, std::fabs(std::fabs(a[0]) - std::fabs(b[0])) / std::fabs(a[0] - b[0]));
  }
  EXPECT_DOUBLE_EQ(est.constant, brute);
}

TEST(Lipschitz, ConstantAndLinear) {
  EXPECT_EQ(estimate_lipschitz(problem("dim 2\nobjective 7"), vec({1.0, 1.0}), 1.0, 50, 42).constant, 0.0);
  for (double u0 : {-10.0, 0.0, 3.5}) {
    const auto est = estimate_lipschitz(problem("dim 1\nobjective 3*x1"), vec({u0}), 1.0, 100, 9);
    EXPECT_NEAR(est.constant, 3.0, 1e-9);
  }
}

TEST(Lipschitz, MonotoneInSampleCount) {
  const auto p = problem("dim 2\nobjective max(abs(x1), 2*x2) - x1*x2");
  double previous = 0.0;
  for (std::size_t n : {2u, 5u, 10u, 50u, 100u, 400u}) {
    const double k = estimate_lipschitz(p, vec({0.2, -0.1}), 0.5, n, 5).constant;
    EXPECT_GE(k, previous);
    previous = k;
  }
}

TEST(Lipschitz, RejectsBadArguments) {
  const auto p = problem("dim 1\nobjective x1");
  EXPECT_THROW(estimate_lipschitz(p, vec({0.0}), 0.0, 10, 1), std::invalid_argument);
  EXPECT_THROW(estimate_lipschitz(p, vec({0.0}), 1.0, 1, 1), std::invalid_argument);
}
