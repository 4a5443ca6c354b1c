#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "mixedwave/iteration.hpp"
#include "mixedwave/model.hpp"

using namespace mixedwave;

namespace {

// Independent restatements of the closed forms.
double oracle_theta1(int n, double p, double q) { return (q + 1.0 + 1.0 / p) / (p * q - 1.0) - 0.5 * (n - 1); }
double oracle_theta2(int n, double p, double q) { return (2.0 + 1.0 / q) / (p * q - 1.0) - 0.5 * (n - 1); }
double oracle_qmix(int n) { return 0.5 * (1.0 + std::sqrt((n + 9.0) / (n + 1.0))); }
double oracle_pmix(int n) { return (n + 1.0 + std::sqrt((n + 9.0) * (n + 1.0))) / (2.0 * (n - 1)); }

}  // namespace

TEST(ExponentPair, RejectsExponentsAtOrBelowOne) {
  EXPECT_THROW(ExponentPair(1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(ExponentPair(2.0, 0.5), std::invalid_argument);
  EXPECT_THROW(ExponentPair(std::nan(""), 2.0), std::invalid_argument);
  EXPECT_NO_THROW(ExponentPair(1.0001, 1.0001));
}

TEST(Theta, ClosedFormValues) {
  EXPECT_NEAR(theta1(3, {2, 2}), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(theta2(3, {2, 2}), -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(theta2(2, {2, 2}), 1.0 / 3.0, 1e-15);
  EXPECT_GT(theta1(1, {5, 7}), 0.0);
  EXPECT_GT(theta2(1, {5, 7}), 0.0);
  for (int n = 1; n <= 6; ++n) {
    for (double p : {1.2, 2.0, 3.7}) {
      for (double q : {1.1, 2.5, 4.0}) {
        EXPECT_NEAR(theta1(n, {p, q}), oracle_theta1(n, p, q), 1e-13);
        EXPECT_NEAR(theta2(n, {p, q}), oracle_theta2(n, p, q), 1e-13);
      }
    }
  }
}

TEST(Theta, StrictlyDecreasingInDimension) {
  for (double p : {1.5, 2.0, 3.0}) {
    for (double q : {1.5, 2.0, 3.0}) {
      for (int n = 1; n < 12; ++n) {
        EXPECT_LT(theta1(n + 1, {p, q}), theta1(n, {p, q}));
        EXPECT_LT(theta2(n + 1, {p, q}), theta2(n, {p, q}));
      }
    }
  }
}

TEST(Theta, RejectsBadDimension) {
  EXPECT_THROW(theta1(0, {2, 2}), std::invalid_argument);
  EXPECT_THROW(classify(-1, {2, 2}), std::invalid_argument);
}

TEST(Classify, Regions) {
  EXPECT_EQ(classify(3, {2, 2}).region, Region::Subcritical);
  EXPECT_EQ(classify(3, cusp_exponents(3).pair()).region, Region::DoubleCritical);
  const CriticalData super = classify(3, {4, 4});
  EXPECT_EQ(super.region, Region::Supercritical);
  EXPECT_NEAR(super.theta1, 5.25 / 15.0 - 1.0, 1e-14);
  EXPECT_NEAR(super.theta2, 2.25 / 15.0 - 1.0, 1e-14);
}

TEST(Classify, CriticalBranchesWithinTolerance) {
  for (int n = 2; n <= 6; ++n) {
    const double q = 2.0;
    const double p1 = critical_curve_p(CriticalCase::Theta1, n, q);
    EXPECT_EQ(classify(n, {p1, q}).region, Region::CriticalTheta1) << "n=" << n;
    // Perturb p so that |ΔΘ| stays below tol/2.
    const double h = 1e-6;
    const double slope = std::abs(oracle_theta1(n, p1 + h, q) - oracle_theta1(n, p1 - h, q)) / (2 * h);
    const double dp = 0.25 * kEqualityTolerance / slope;
    EXPECT_EQ(classify(n, {p1 + dp, q}).region, Region::CriticalTheta1);
    EXPECT_EQ(classify(n, {p1 - dp, q}).region, Region::CriticalTheta1);
  }
}

TEST(Cusp, ClosedFormsForNThree) {
  const CuspPoint c = cusp_exponents(3);
  EXPECT_NEAR(c.q_mix, (1.0 + std::sqrt(3.0)) / 2.0, 1e-14);
  EXPECT_NEAR(c.p_mix, (4.0 + std::sqrt(48.0)) / 4.0, 1e-14);
  EXPECT_DOUBLE_EQ(c.p_glassey, 2.0);
  EXPECT_NEAR(c.p_strauss, 1.0 + std::sqrt(2.0), 1e-14);
}

TEST(Cusp, MatchesIndependentFormulas) {
  for (int n = 2; n <= 50; ++n) {
    const CuspPoint c = cusp_exponents(n);
    EXPECT_NEAR(c.q_mix, oracle_qmix(n), 1e-13);
    EXPECT_NEAR(c.p_mix, oracle_pmix(n), 1e-12);
    const double ps = c.p_strauss;
    EXPECT_NEAR((n - 1) * ps * ps - (n + 1) * ps - 2.0, 0.0, 1e-11);
    EXPECT_TRUE(c.ordered()) << "n=" << n;
    EXPECT_LT(c.q_mix, c.p_glassey);
    EXPECT_LT(c.p_glassey, c.p_strauss);
    EXPECT_LT(c.p_strauss, c.p_mix);
    EXPECT_LT(c.q_mix, (1.0 + std::sqrt(5.0)) / 2.0);
  }
  EXPECT_THROW(cusp_exponents(1), std::invalid_argument);
}

TEST(Cusp, ResidualsVanish) {
  for (int n = 2; n <= 10; ++n) {
    const CuspResiduals r = cusp_residuals(n);
    EXPECT_LT(std::abs(r.cubic), 1e-12) << "n=" << n;
    EXPECT_LT(std::abs(r.theta1), 1e-12) << "n=" << n;
    EXPECT_LT(std::abs(r.theta2), 1e-12) << "n=" << n;
    const CuspPoint c = cusp_exponents(n);
    EXPECT_LT(std::abs(oracle_theta1(n, c.p_mix, c.q_mix)), 1e-12);
    EXPECT_LT(std::abs(oracle_theta2(n, c.p_mix, c.q_mix)), 1e-12);
    EXPECT_NEAR(cusp_p_from_q(c.q_mix), c.p_mix, 1e-11);
  }
  // Known coordinates for n = 2.
  EXPECT_NEAR(cusp_exponents(2).q_mix, 1.4574271, 1e-7);
  EXPECT_NEAR(cusp_exponents(2).p_mix, (3.0 + std::sqrt(33.0)) / 2.0, 1e-12);
}

TEST(Lifespan, Predictions) {
  const LifespanPrediction sub = lifespan_prediction(3, {2, 2});
  EXPECT_EQ(sub.kind, LifespanKind::PowerLaw);
  EXPECT_NEAR(sub.exponent, -6.0, 1e-12);

  const CuspPoint c = cusp_exponents(3);
  const double pq = c.p_mix * c.q_mix;
  const LifespanPrediction dbl = lifespan_prediction(3, c.pair());
  EXPECT_EQ(dbl.kind, LifespanKind::ExpDouble);
  EXPECT_NEAR(dbl.exponent, -c.q_mix * (pq - 1.0) / (c.q_mix + 1.0), 1e-12);

  EXPECT_EQ(lifespan_prediction(3, {4, 4}).kind, LifespanKind::None);

  const double p1 = critical_curve_p(CriticalCase::Theta1, 3, 2.0);
  const LifespanPrediction t1 = lifespan_prediction(3, {p1, 2.0});
  EXPECT_EQ(t1.kind, LifespanKind::ExpTheta1);
  EXPECT_NEAR(t1.exponent, -p1 * (2.0 * p1 - 1.0), 1e-10);
}

TEST(Lifespan, PowerLawUsesLargerTheta) {
  // n = 2, p = q = 2: Θ1 = 3.5/3 - 1/2 = 2/3 and Θ2 = 1/3.
  const LifespanPrediction pred = lifespan_prediction(2, {2, 2});
  EXPECT_EQ(pred.kind, LifespanKind::PowerLaw);
  EXPECT_NEAR(pred.exponent, -1.5, 1e-12);
}
