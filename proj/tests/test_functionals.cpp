#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>
#include <json.hpp>

#include "mixedwave/functionals.hpp"

using namespace mixedwave;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double simpson(F f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

ProblemSpec short_spec(double t_max = 2.0) {
  ProblemSpec ps;
  ps.grid.t_max = t_max;
  ps.grid.output_samples = 400;
  return ps;
}

// Amplitude 5 blows up before t = 30 undamped and with power damping; the
// exponential family with mu = 1 needs amplitude 8.
ProblemSpec blowup_spec(DampingSpec b) {
  ProblemSpec ps;
  const double a = b.family == DampingFamily::ExpDecay ? 8.0 : 5.0;
  ps.data = {24, a, a, a, a};
  ps.b1 = b;
  ps.b2 = b;
  ps.grid.t_max = 30.0;
  ps.grid.output_samples = 600;
  return ps;
}

const BoundCheck& find(const std::vector<BoundCheck>& checks, BoundId id) {
  for (const auto& c : checks) {
    if (c.bound_id == id) return c;
  }
  throw std::logic_error("missing check");
}

FunctionalSeries plain(const SolutionRecord& rec, const ProblemSpec& ps) {
  ExtractOptions o;
  o.kernels = false;
  return extract(rec, ps, 0.0, 0.0, o);
}

}  // namespace

TEST(Extract, InitialValuesMatchDataIntegrals) {
  ProblemSpec ps = short_spec(0.5);
  ps.eps = 0.7;
  ps.data = {24, 1.3, 2.0, 0.8, 0.4};
  ps.b1 = {DampingFamily::PowerDecay, 0.5, 2.0};
  const SolutionRecord rec = run(ps);
  const FunctionalSeries s = plain(rec, ps);
  const int k = ps.data.k;
  // |S²| ∫_0^1 (1-ρ²)^k ρ² dρ = 4π · B(3/2, k+1)/2
  const double mass = 4 * kPi * 0.5 * boost::math::beta(1.5, k + 1.0);
  EXPECT_NEAR(s.U[0] / (ps.eps * 1.3 * mass), 1.0, 1e-3);
  EXPECT_NEAR(s.Uprime[0] / (ps.eps * 2.0 * mass), 1.0, 1e-3);
  EXPECT_NEAR(s.V[0] / (ps.eps * 0.8 * mass), 1.0, 1e-3);

  // ∫ u1 Φ dx = 4π ∫ u1(ρ) 4π sinh(ρ)/ρ ρ² dρ
  const double u1_phi =
      16 * kPi * kPi * simpson([&](double r) { return 2.0 * std::pow(1 - r * r, k) * std::sinh(r) * r; }, 0.0, 1.0, 2000);
  EXPECT_NEAR(s.U2[0] / (ps.eps * u1_phi), 1.0, 1e-3);
  const InitialDataIntegrals I = data_integrals(ps);
  EXPECT_NEAR(s.U2[0], 2.0 / multiplier(ps.b1, 0.0) * ps.eps * I.I1_u1, 1e-3 * s.U2[0]);
  EXPECT_NEAR(I.I1_u1, 0.5 * multiplier(ps.b1, 0.0) * u1_phi, 1e-10 * u1_phi);
  EXPECT_GT(I.I2_v0, 0.0);
}

TEST(Extract, SpatialQuadratureSecondOrder) {
  const double mass = 4 * kPi * 0.5 * boost::math::beta(1.5, 25.0);
  std::vector<double> err;
  for (double dr : {0.01, 0.005}) {
    ProblemSpec ps = short_spec(0.1);
    ps.grid.dr = dr;
    const SolutionRecord rec = run(ps);
    err.push_back(std::abs(plain(rec, ps).U[0] / mass - 1.0));
  }
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.2);
}

TEST(Extract, SeriesLengthsAndFiniteness) {
  ProblemSpec ps = short_spec(1.0);
  const SolutionRecord rec = run(ps);
  const FunctionalSeries s = extract(rec, ps, 0.5, 0.5);
  const std::size_t m = s.size();
  ASSERT_GT(m, 10u);
  for (const auto* v : {&s.U, &s.Uprime, &s.V, &s.Vprime, &s.U1, &s.V1, &s.U2, &s.curlyU, &s.curlyV}) {
    ASSERT_EQ(v->size(), m);
    for (double x : *v) EXPECT_TRUE(std::isfinite(x));
  }
}

TEST(Extract, ZeroDataGivesZeroSeries) {
  ProblemSpec ps = short_spec(0.5);
  ps.enforce_hypotheses = false;
  ps.data = {24, 0.0, 0.0, 0.0, 0.0};
  const SolutionRecord rec = run(ps);
  const FunctionalSeries s = extract(rec, ps, 0.5, 0.5);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s.U[i], 0.0);
    EXPECT_EQ(s.U2[i], 0.0);
    EXPECT_EQ(s.curlyV[i], 0.0);
  }
  const auto checks = check_floor_bounds(s, data_integrals(ps), ps.eps);
  EXPECT_TRUE(all_passed(checks));
}

TEST(Extract, RejectsMismatchAndMissingProfiles) {
  ProblemSpec ps = short_spec(0.5);
  const SolutionRecord rec = run(ps);
  ProblemSpec other = ps;
  other.grid.dr = 0.005;
  EXPECT_THROW(extract(rec, other, 0.5, 0.5), std::invalid_argument);
  EXPECT_THROW(extract(rec, ps, -1.0, 0.5), std::invalid_argument);
  ProblemSpec bare = ps;
  bare.grid.store_profiles = false;
  EXPECT_THROW(extract(run(bare), bare, 0.5, 0.5), std::invalid_argument);
}

TEST(Extract, KernelSeriesAtTimeZero) {
  // 𝒰(0) = ε∫u1 ξ_{r1}(0,0,x)dx and 𝒱(0) = ε∫v0 ξ_{r2}(0,0,x)dx
  ProblemSpec ps = short_spec(0.2);
  const SolutionRecord rec = run(ps);
  const double r1 = 0.5, r2 = 0.3;
  const FunctionalSeries s = extract(rec, ps, r1, r2);
  auto weighted = [&](double r) {
    KernelConfig kc;
    kc.r = r;
    const KernelEvaluator ev(kc, 3);
    return 4 * kPi *
           simpson([&](double rho) { return ps.data.bump(rho, ps.R) * ev.xi(0.0, 0.0, rho) * rho * rho; }, 0.0, 1.0, 400);
  };
  EXPECT_NEAR(s.curlyU[0] / (ps.eps * ps.data.a_u1 * weighted(r1)), 1.0, 1e-3);
  EXPECT_NEAR(s.curlyV[0] / (ps.eps * ps.data.a_v0 * weighted(r2)), 1.0, 1e-3);
}

TEST(Derivatives, UDerivativeAndOde) {
  for (DampingSpec b : {DampingSpec{}, DampingSpec{DampingFamily::PowerDecay, 0.5, 2.0}}) {
    ProblemSpec ps = short_spec(6.0);
    ps.b1 = b;
    ps.b2 = b;
    const SolutionRecord rec = run(ps);
    const FunctionalSeries s = plain(rec, ps);
    EXPECT_LT(derivative_residual(s), 1e-3);
    EXPECT_LT(ode_residual(s, ps), 0.02);
  }
}

TEST(Derivatives, OdeAwayFromBlowup) {
  ProblemSpec ps = blowup_spec({});
  ps.grid.t_max = 12.0;
  ps.grid.output_samples = 2000;
  const SolutionRecord rec = run(ps);
  ASSERT_TRUE(rec.blew_up());
  const FunctionalSeries s = plain(rec, ps);
  EXPECT_LT(ode_residual(s, ps, 0.8 * *rec.t_blowup), 0.02);
  EXPECT_LT(derivative_residual(s, 0.8 * *rec.t_blowup), 1e-3);
}

TEST(Floors, HoldOnUndampedAndDampedRuns) {
  for (DampingSpec b : {DampingSpec{}, DampingSpec{DampingFamily::PowerDecay, 0.5, 2.0},
                        DampingSpec{DampingFamily::ExpDecay, 1.0, 0.0}}) {
    for (double amplitude : {1.0, 5.0}) {
      ProblemSpec ps = blowup_spec(b);
      ps.data = {24, amplitude, amplitude, amplitude, amplitude};
      ps.grid.t_max = 12.0;
      const SolutionRecord rec = run(ps);
      const FunctionalSeries s = plain(rec, ps);
      const auto checks = check_floor_bounds(s, data_integrals(ps), ps.eps);
      for (const auto& c : checks) {
        EXPECT_TRUE(c.pass) << to_string(b.family) << " A=" << amplitude << " " << to_string(c.bound_id)
                            << " margin=" << c.min_margin;
      }
      EXPECT_TRUE(check_uprime_floor(s, ps).pass);
    }
  }
}

TEST(Floors, NegativeControlFailsU2) {
  ProblemSpec ps = short_spec(4.0);
  ps.enforce_hypotheses = false;
  ps.data.a_u1 = -1.0;
  const SolutionRecord rec = run(ps);
  const auto checks = check_floor_bounds(plain(rec, ps), data_integrals(ps), ps.eps);
  EXPECT_FALSE(find(checks, BoundId::U2Floor).pass);
}

TEST(Envelopes, HoldOnBlowingUpRuns) {
  for (DampingSpec b : {DampingSpec{}, DampingSpec{DampingFamily::PowerDecay, 0.5, 2.0},
                        DampingSpec{DampingFamily::ExpDecay, 1.0, 0.0}}) {
    const ProblemSpec ps = blowup_spec(b);
    const SolutionRecord rec = run(ps);
    ASSERT_TRUE(rec.blew_up()) << to_string(b.family);
    const auto checks = check_nonlinearity_bounds(rec, ps);
    ASSERT_EQ(checks.size(), 2u);
    for (const auto& c : checks) {
      EXPECT_TRUE(c.pass) << to_string(b.family) << " " << to_string(c.bound_id) << " margin=" << c.min_margin;
      EXPECT_DOUBLE_EQ(c.t_lo, 1.0);
      EXPECT_LE(c.t_hi, *rec.t_blowup);
    }
  }
}

TEST(Identity, ShortHorizonResidualsSmall) {
  ProblemSpec ps = short_spec(2.0);
  ps.grid.dr = 0.005;
  const SolutionRecord rec = run(ps);
  const KernelParameters kp = default_kernel_parameters(ps.n, ps.pq);
  const IdentityResiduals res = check_fundamental_identity(rec, ps, kp.r1, kp.r2);
  EXPECT_LT(res.curlyU, 0.02);
  EXPECT_LT(res.curlyV, 0.02);
  EXPECT_EQ(res.checkpoints.size(), 8u);
}

TEST(Identity, RejectsDamping) {
  ProblemSpec ps = short_spec(0.5);
  ps.b2 = {DampingFamily::ExpDecay, 1.0, 0.0};
  const SolutionRecord rec = run(ps);
  EXPECT_THROW(check_fundamental_identity(rec, ps, 0.5, 0.5), std::invalid_argument);
}

TEST(LogSeeds, CuspRunPasses) {
  ProblemSpec ps;
  ps.pq = cusp_exponents(3).pair();
  ps.data = {24, 3.0, 3.0, 3.0, 3.0};
  ps.grid.t_max = 8.0;
  ps.grid.output_samples = 400;
  const SolutionRecord rec = run(ps);
  const KernelParameters kp = default_kernel_parameters(ps.n, ps.pq);
  const FunctionalSeries s = extract(rec, ps, kp.r1, kp.r2);
  const auto checks = check_log_seeds(s, ps, ps.eps);
  ASSERT_EQ(checks.size(), 2u);
  for (const auto& c : checks) {
    EXPECT_TRUE(c.pass) << to_string(c.bound_id) << " margin=" << c.min_margin;
    EXPECT_NEAR(c.t_lo, std::exp(1.0), 0.05);
  }
}

TEST(LogSeeds, RejectsNonCritical) {
  ProblemSpec ps = short_spec(3.0);
  const SolutionRecord rec = run(ps);
  const FunctionalSeries s = extract(rec, ps, 0.5, 0.5);
  EXPECT_THROW(check_log_seeds(s, ps, ps.eps), std::invalid_argument);
}

TEST(KernelDefaults, CriticalAndSubcritical) {
  const KernelParameters cusp = default_kernel_parameters(3, cusp_exponents(3).pair());
  EXPECT_NEAR(cusp.r1, 1.0 - 1.0 / cusp_exponents(3).p_mix, 1e-12);
  EXPECT_NEAR(cusp.r2, 1.0 - 1.0 / cusp_exponents(3).q_mix, 1e-12);
  const KernelParameters sub = default_kernel_parameters(3, {2.0, 2.0});
  EXPECT_DOUBLE_EQ(sub.r1, 0.5);
  EXPECT_DOUBLE_EQ(sub.r2, 0.5);
}

TEST(Reports, CsvAndJson) {
  ProblemSpec ps = short_spec(0.3);
  const SolutionRecord rec = run(ps);
  const FunctionalSeries s = plain(rec, ps);
  std::ostringstream csv;
  write_series_csv(csv, s);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "t,U,Uprime,V,Vprime,U1,V1,U2,curlyU,curlyV");
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, s.size());

  const auto checks = check_floor_bounds(s, data_integrals(ps), ps.eps);
  std::ostringstream js;
  write_checks_json(js, checks);
  const auto doc = nlohmann::json::parse(js.str());
  ASSERT_EQ(doc.size(), 3u);
  EXPECT_EQ(doc[0]["bound_id"], "U1Floor");
  EXPECT_EQ(doc[0]["window"].size(), 2u);
  EXPECT_TRUE(doc[0]["pass"].get<bool>());
}
