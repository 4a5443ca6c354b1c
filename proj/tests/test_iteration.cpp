#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "mixedwave/iteration.hpp"

using namespace mixedwave;

namespace {

struct Sample {
  int n;
  ExponentPair pq;
};

// Brute linear recursion x_{j+1} = m x_j + c from x_0.
std::vector<double> affine(double x0, double m, double c, int j_max) {
  std::vector<double> x{x0};
  for (int j = 0; j < j_max; ++j) x.push_back(m * x.back() + c);
  return x;
}

void expect_column(const std::vector<double>& got, const std::vector<double>& want, const char* what) {
  ASSERT_EQ(got.size(), want.size()) << what;
  for (std::size_t j = 0; j < got.size(); ++j) {
    EXPECT_LE(relative_gap(got[j], want[j]), 1e-12) << what << " j=" << j;
  }
}

std::vector<Sample> sample_region(Region region, int n, int count, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(1.05, 4.0);
  std::uniform_real_distribution<double> uq(1.05, 3.0);
  std::vector<Sample> out;
  for (int tries = 0; static_cast<int>(out.size()) < count && tries < 100000; ++tries) {
    double p = u(rng), q = uq(rng);
    try {
      if (region == Region::CriticalTheta1) p = critical_curve_p(CriticalCase::Theta1, n, q);
      if (region == Region::CriticalTheta2) p = critical_curve_p(CriticalCase::Theta2, n, q);
    } catch (const std::invalid_argument&) {
      continue;
    }
    const ExponentPair pq(p, q);
    if (classify(n, pq).region == region) out.push_back({n, pq});
  }
  return out;
}

}  // namespace

TEST(Subcritical, WorkedExampleNThree) {
  const SubcriticalTables t = subcritical_sequences(3, {2, 2}, 5);
  EXPECT_DOUBLE_EQ(t.C.t_power[0], 4.0);
  EXPECT_DOUBLE_EQ(t.C.t_power[1], 20.0);
  EXPECT_NEAR(t.C.t_power_closed[1], 16.0 / 3.0 * 4.0 - 4.0 / 3.0, 1e-13);
  EXPECT_DOUBLE_EQ(t.K.t_power[0], 3.0);
  EXPECT_DOUBLE_EQ(t.K.t_power[1], 17.0);
  EXPECT_NEAR(t.K.t_power_closed[1], 14.0 / 3.0 * 4.0 - 5.0 / 3.0, 1e-13);
  EXPECT_DOUBLE_EQ(t.C.weight_power[0], 2.0);
  EXPECT_DOUBLE_EQ(t.C.weight_power[1], 17.0);
  EXPECT_NEAR(t.C.weight_power_closed[1], 5.0 * 4.0 - 3.0, 1e-13);
  EXPECT_TRUE(t.C.ell.empty());
}

TEST(Subcritical, ColumnsMatchBruteRecursions) {
  for (int n : {2, 3, 4, 5}) {
    for (auto [p, q] : {std::pair{2.0, 2.0}, std::pair{1.5, 3.0}, std::pair{3.0, 1.2}}) {
      const ExponentPair pq(p, q);
      const double x = pq.product();
      const SubcriticalTables t = subcritical_sequences(n, pq, kMaxIterations);
      expect_column(t.C.t_power, affine(n + 1.0, x, p + 2.0, kMaxIterations), "a");
      expect_column(t.C.weight_power, affine(0.5 * (n - 1) * p, x, n * (x - 1), kMaxIterations), "b");
      expect_column(t.K.t_power, affine(n, x, 2 * q + 1, kMaxIterations), "alpha");
      expect_column(t.K.weight_power, affine(0.5 * (n - 1) * q, x, n * (x - 1), kMaxIterations), "beta");
      expect_column(t.C.t_power_closed, t.C.t_power, "a closed");
      expect_column(t.C.weight_power_closed, t.C.weight_power, "b closed");
      expect_column(t.K.coeff_log_closed, t.K.coeff_log, "K closed");
      expect_column(t.C.coeff_log_closed, t.C.coeff_log, "C closed");
    }
  }
}

TEST(Subcritical, CoefficientRecursionFromSeed) {
  // log C_{j+1} = log C + p log K + pq log C_j - p log(a_j q + 1)
  //               - log(a_j pq + p + 1) - log(a_j pq + p + 2), with C = K = 1.
  const int n = 3;
  const ExponentPair pq(2.0, 1.5);
  const double p = pq.p(), q = pq.q(), x = pq.product();
  const SubcriticalTables t = subcritical_sequences(n, pq, 12);
  double logC = t.C.coeff_log[0];
  for (int j = 0; j < 12; ++j) {
    const double a = t.C.t_power[j];
    logC = x * logC - p * std::log(a * q + 1) - std::log(a * x + p + 1) - std::log(a * x + p + 2);
    EXPECT_LE(relative_gap(logC, t.C.coeff_log[j + 1]), 1e-12) << "j=" << j + 1;
  }
}

TEST(Subcritical, LogCoefficientScalingConverges) {
  for (auto [p, q] : {std::pair{2.0, 2.0}, std::pair{1.6, 1.6}, std::pair{3.0, 2.5}}) {
    const ExponentPair pq(p, q);
    const SubcriticalTables t = subcritical_sequences(3, pq, kMaxIterations);
    const double x = pq.product();
    const double c40 = t.C.coeff_log[40] / std::pow(x, 40);
    const double c60 = t.C.coeff_log[60] / std::pow(x, 60);
    EXPECT_LT(std::abs(c40 - c60), 1e-9 * std::max(1.0, std::abs(c60)));
  }
}

TEST(Subcritical, RejectsTooManyIterations) {
  EXPECT_THROW(subcritical_sequences(3, {2, 2}, kMaxIterations + 1), std::invalid_argument);
}

TEST(Critical, DoubleAtCusp) {
  const CuspPoint c = cusp_exponents(3);
  const double p = c.p_mix, q = c.q_mix, x = p * q;
  EXPECT_NEAR(x, 2.0 + std::sqrt(3.0), 1e-12);
  const SequenceTable t = critical_sequences(CriticalCase::Double, 3, c.pair(), 20);
  EXPECT_DOUBLE_EQ(t.t_power[0], 1.0);
  EXPECT_NEAR(t.t_power[1], x + q + 1.0, 1e-13);
  EXPECT_NEAR((1.0 + (q + 1.0) / (x - 1.0)) * x - (q + 1.0) / (x - 1.0), t.t_power[1], 1e-12);
  EXPECT_DOUBLE_EQ(t.weight_power[0], 0.0);
  EXPECT_NEAR(t.weight_power[1], x - 1.0, 1e-13);
  for (int j = 0; j <= 20; ++j) EXPECT_NEAR(t.weight_power_closed[j], std::pow(x, j) - 1.0, 1e-12 * std::pow(x, j));
  ASSERT_EQ(t.ell.size(), 21u);
  EXPECT_DOUBLE_EQ(t.ell[0], 1.0);
  EXPECT_DOUBLE_EQ(t.ell[1], 1.5);
  EXPECT_NEAR(t.ell[20], 2.0, 1e-5);
}

TEST(Critical, ColumnsMatchBruteRecursions) {
  for (int n : {2, 3, 4, 5}) {
    const double q = 2.0;
    const ExponentPair pq1(critical_curve_p(CriticalCase::Theta1, n, q), q);
    if (classify(n, pq1).region == Region::CriticalTheta1) {
      const double x = pq1.product();
      const SequenceTable t = critical_sequences(CriticalCase::Theta1, n, pq1, kMaxIterations);
      expect_column(t.t_power, affine(1.0, x, 1.0, kMaxIterations), "a");
      expect_column(t.weight_power, affine(0.0, x, q * (pq1.p() - 1), kMaxIterations), "b");
    }
    const CuspPoint c = cusp_exponents(n);
    const double x = c.p_mix * c.q_mix;
    const SequenceTable d = critical_sequences(CriticalCase::Double, n, c.pair(), kMaxIterations);
    expect_column(d.t_power, affine(1.0, x, c.q_mix + 1, kMaxIterations), "g");
    expect_column(d.weight_power, affine(0.0, x, x - 1, kMaxIterations), "h");
  }
}

TEST(Critical, Theta2Columns) {
  const int n = 3;
  const double q = 1.2;
  const ExponentPair pq(critical_curve_p(CriticalCase::Theta2, n, q), q);
  ASSERT_EQ(classify(n, pq).region, Region::CriticalTheta2);
  const SequenceTable t = critical_sequences(CriticalCase::Theta2, n, pq, kMaxIterations);
  const double x = pq.product();
  expect_column(t.t_power, affine(1.0, x, 1.0, kMaxIterations), "alpha");
  expect_column(t.weight_power, affine(0.0, x, pq.p() * (q - 1), kMaxIterations), "beta");
  EXPECT_LE(t.max_relative_gap(), 1e-12);
}

TEST(Critical, RejectsOffCurveInput) {
  EXPECT_THROW(critical_sequences(CriticalCase::Theta1, 3, {2, 2}, 10), std::invalid_argument);
  EXPECT_THROW(critical_sequences(CriticalCase::Double, 3, {2, 2}, 10), std::invalid_argument);
  EXPECT_THROW(critical_case_from_string("theta3"), std::invalid_argument);
}

TEST(ClosedForms, AgreeOverSampledGrid) {
  std::mt19937 rng(20240611);
  int tuples = 0;
  for (int n : {2, 3, 4, 5}) {
    for (const Sample& s : sample_region(Region::Subcritical, n, 20, rng)) {
      const SubcriticalTables t = subcritical_sequences(s.n, s.pq, kMaxIterations);
      EXPECT_LE(t.C.max_relative_gap(), 1e-12);
      EXPECT_LE(t.K.max_relative_gap(), 1e-12);
      ++tuples;
    }
    for (auto [region, c] : {std::pair{Region::CriticalTheta1, CriticalCase::Theta1},
                             std::pair{Region::CriticalTheta2, CriticalCase::Theta2}}) {
      for (const Sample& s : sample_region(region, n, 20, rng)) {
        EXPECT_LE(critical_sequences(c, s.n, s.pq, kMaxIterations).max_relative_gap(), 1e-12);
        ++tuples;
      }
    }
    EXPECT_LE(critical_sequences(CriticalCase::Double, n, cusp_exponents(n).pair(), kMaxIterations).max_relative_gap(),
              1e-12);
    ++tuples;
  }
  EXPECT_GE(tuples, 80);
}

TEST(Sums, GeometricExamples) {
  const GeometricSums g = geometric_sums(4.0, 3);
  EXPECT_DOUBLE_EQ(g.first_direct, 21.0);
  EXPECT_NEAR(g.first_closed, 21.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.second_direct, 27.0);
  EXPECT_NEAR(g.second_closed, 27.0, 1e-12);
  for (double x : {1.5, 2.0, 7.3}) {
    const GeometricSums one = geometric_sums(x, 1);
    EXPECT_DOUBLE_EQ(one.first_direct, 1.0);
    EXPECT_NEAR(one.first_closed, 1.0, 1e-14);
    for (int j = 1; j <= 40; ++j) {
      const GeometricSums s = geometric_sums(x, j);
      EXPECT_LE(relative_gap(s.first_direct, s.first_closed), 1e-12);
      EXPECT_LE(relative_gap(s.second_direct, s.second_closed), 1e-12);
    }
  }
}

TEST(Sums, SeriesS) {
  const SeriesS s = series_S(4.0, 200);
  EXPECT_NEAR(s.limit, 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(s.partial[0], 0.25, 1e-15);
  for (std::size_t j = 1; j < s.partial.size(); ++j) {
    EXPECT_GE(s.partial[j], s.partial[j - 1]);
    EXPECT_LE(s.partial[j], s.limit * (1 + 1e-15));
  }
  for (double x : {1.5, 2.0, 3.7306, 10.0}) {
    const SeriesS t = series_S(x, 200);
    EXPECT_LE(relative_gap(t.partial.back(), t.limit), 1e-12) << "pq=" << x;
    EXPECT_NEAR(t.limit, x / ((x - 1) * (x - 1)), 1e-13 * t.limit);
    EXPECT_NEAR(derive_constants(3, {x / 1.2, 1.2}).S, t.limit, 1e-12 * t.limit);
  }
}

TEST(Threshold, IllustrativeUnitConstants) {
  IterationConstants c;
  c.N = 1.0;
  const ThresholdTime tt = threshold_time(3, {2, 2}, 0.1, c);
  EXPECT_EQ(tt.kind, LifespanKind::PowerLaw);
  EXPECT_NEAR(tt.log_T, 15 * std::log(2.0) + 6 * std::log(10.0), 1e-12);
  EXPECT_NEAR(tt.T() / (std::pow(2.0, 15) * 1e6), 1.0, 1e-12);
}

TEST(Threshold, HalvingLawExact) {
  for (int n : {2, 3, 4}) {
    for (auto [p, q] : {std::pair{2.0, 2.0}, std::pair{1.5, 1.8}, std::pair{1.3, 3.0}}) {
      const ExponentPair pq(p, q);
      const CriticalData d = classify(n, pq);
      if (d.region != Region::Subcritical) continue;
      const IterationConstants c = derive_constants(n, pq);
      const double ratio_log =
          threshold_time(n, pq, 0.05, c).log_T - threshold_time(n, pq, 0.1, c).log_T;
      EXPECT_NEAR(ratio_log / std::log(2.0), 1.0 / d.max_theta(), 1e-12);
    }
  }
  const IterationConstants c = derive_constants(3, {2, 2});
  EXPECT_NEAR(threshold_time(3, {2, 2}, 0.05, c).T() / threshold_time(3, {2, 2}, 0.1, c).T(), 64.0, 64e-12);
}

TEST(Threshold, CriticalExponents) {
  const CuspPoint cusp = cusp_exponents(3);
  const IterationConstants c = derive_constants(3, cusp.pair());
  const double d = threshold_time(3, cusp.pair(), 0.1, c).log_log_T - threshold_time(3, cusp.pair(), 0.2, c).log_log_T;
  const double x = cusp.p_mix * cusp.q_mix;
  EXPECT_NEAR(d / std::log(2.0), cusp.q_mix * (x - 1) / (cusp.q_mix + 1), 1e-12);
  EXPECT_THROW(threshold_time(3, {4, 4}, 0.1, derive_constants(3, {4, 4})), std::invalid_argument);
}

TEST(Threshold, DriverIsOneAtThresholdEverywhere) {
  std::mt19937 rng(7);
  std::vector<Sample> samples;
  for (int n : {2, 3, 4}) {
    for (Region r : {Region::Subcritical, Region::CriticalTheta1, Region::CriticalTheta2}) {
      for (const Sample& s : sample_region(r, n, 5, rng)) samples.push_back(s);
    }
    samples.push_back({n, cusp_exponents(n).pair()});
  }
  ASSERT_GE(samples.size(), 30u);
  for (const Sample& s : samples) {
    const IterationConstants c = derive_constants(s.n, s.pq);
    for (double eps : {0.3, 0.8}) {
      const ThresholdTime tt = threshold_time(s.n, s.pq, eps, c);
      const double driver = divergence_driver(tt.formula_id, s.n, s.pq, eps, tt.log_T, c);
      EXPECT_NEAR(driver, 1.0, 1e-9) << tt.formula_id << " n=" << s.n;
      EXPECT_LT(divergence_driver(tt.formula_id, s.n, s.pq, eps, tt.log_T * (1 - 1e-6), c), 1.0);
      EXPECT_GT(divergence_driver(tt.formula_id, s.n, s.pq, eps, tt.log_T * (1 + 1e-6), c), 1.0);
    }
  }
}

TEST(Threshold, CertificateMonotoneInTime) {
  const ExponentPair pq(2, 2);
  const IterationConstants c = derive_constants(3, pq);
  const SubcriticalTables t = subcritical_sequences(3, pq, 10, 0.5);
  const double T = threshold_time(3, pq, 0.5, c).T();
  EXPECT_FALSE(divergence_certificate(t.C, 0.5, T * 0.99, c));
  EXPECT_TRUE(divergence_certificate(t.C, 0.5, T * 1.01, c));
  bool seen = false;
  for (double f = 0.1; f < 10.0; f *= 1.1) {
    const bool cert = divergence_certificate(t.C, 0.5, T * f, c);
    if (seen) {
      EXPECT_TRUE(cert);
    }
    seen = seen || cert;
  }
}

TEST(Constants, PositiveAndFrameValidated) {
  for (const ExponentPair& pq : {ExponentPair(2, 2), cusp_exponents(3).pair(), ExponentPair(1.4, 3)}) {
    const IterationConstants c = derive_constants(3, pq);
    for (double v : {c.M, c.N, c.Mtilde, c.Ntilde, c.Mcrit, c.Ncrit, c.E, c.M1, c.N1, c.E1, c.M2, c.N2, c.E2, c.S}) {
      EXPECT_GT(v, 0.0);
    }
  }
  FrameConstants bad;
  bad.C = -1.0;
  EXPECT_THROW(derive_constants(3, {2, 2}, bad), std::invalid_argument);
}

TEST(KernelParameters, CriticalPrescriptions) {
  const double p1 = critical_curve_p(CriticalCase::Theta1, 3, 2.0);
  const KernelParameters t1 = r_parameters(CriticalCase::Theta1, 3, {p1, 2.0});
  EXPECT_NEAR(t1.r1, 1.0 - 1.0 / p1, 1e-14);
  EXPECT_NEAR(t1.r2, 1.0 - 0.5 + 0.1, 1e-14);
  for (int n = 2; n <= 10; ++n) {
    const KernelParameters d = r_parameters(CriticalCase::Double, n, cusp_exponents(n).pair());
    EXPECT_LT(d.identity_residual1, 1e-12);
    EXPECT_LT(d.identity_residual2, 1e-12);
    EXPECT_GT(d.r1, -1.0);
    EXPECT_GT(d.r2, -1.0);
  }
  EXPECT_THROW(r_parameters(CriticalCase::Theta1, 3, {2, 2}), std::invalid_argument);
}

TEST(KernelParameters, ThetaOneExample) {
  // Θ1(3, 2, q) = (q + 3/2)/(2q - 1) - 1 vanishes at q = 5/2, where Θ2 = -0.4.
  const ExponentPair pq(2.0, 2.5);
  ASSERT_EQ(classify(3, pq).region, Region::CriticalTheta1);
  EXPECT_NEAR(critical_curve_p(CriticalCase::Theta1, 3, 2.5), 2.0, 1e-12);
  EXPECT_NEAR(r_parameters(CriticalCase::Theta1, 3, pq).r1, 0.5, 1e-14);
}

TEST(Csv, HeaderAndRows) {
  std::ostringstream out;
  write_csv(out, critical_sequences(CriticalCase::Double, 3, cusp_exponents(3).pair(), 20));
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "j,coeff_log,coeff_log_closed,t_power,t_power_closed,weight_power,weight_power_closed,ell_j");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 21);
}
