#ifndef MIXEDWAVE_FUNCTIONALS_HPP
#define MIXEDWAVE_FUNCTIONALS_HPP

// Functionals tracked by the blow-up argument, extracted from a solver record:
//
//   U = ∫u,  U' = ∫u_t,  V = ∫v,  V' = ∫v_t,
//   U1 = ∫u Ψ,  V1 = ∫v Ψ,  U2 = ∫u_t Ψ,       Ψ(t,x) = e^{-t}Φ(x),
//   𝒰 = ∫u_t η_{r1}(t,t,x),  𝒱 = ∫v η_{r2}(t,t,x),
//
// and numerical checks of the lower bounds and identities they satisfy.
// Spatial integrals use the dual-cell volumes of the solver's radial operator.

#include <limits>
#include <ostream>
#include <string_view>
#include <vector>

#include "mixedwave/iteration.hpp"
#include "mixedwave/solver.hpp"

namespace mixedwave {

/// Relative slack granted to every floor check.
inline constexpr double kFloorSlack = 0.02;

struct FunctionalSeries {
  int n = 0;
  double r1 = 0.0;
  double r2 = 0.0;
  std::vector<double> times;
  std::vector<double> U, Uprime, V, Vprime;
  std::vector<double> U1, V1, U2;
  /// Empty when extracted without kernels.
  std::vector<double> curlyU, curlyV;
  /// ∫|v|^q dx and ∫|u_t|^p dx
  std::vector<double> source_u, source_v;

  std::size_t size() const { return times.size(); }
};

struct InitialDataIntegrals {
  double I1_u0 = 0.0;
  double I1_u1 = 0.0;
  double I2_v0 = 0.0;
  double I2_v1 = 0.0;
};

enum class BoundId { U1Floor, V1Floor, U2Floor, NonlinQ, NonlinP, CurlyULog, CurlyVLog, UprimeFloor };

std::string_view to_string(BoundId id);

struct BoundCheck {
  BoundId bound_id = BoundId::U1Floor;
  /// min over the window of (observed - claimed lower bound)
  double min_margin = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  /// Size of the claimed bound at the window start; the slack is relative to it.
  double reference = 0.0;
  bool pass = false;
};

struct ExtractOptions {
  double lambda0 = 1.0;
  int quad_nodes = 64;
  /// false skips 𝒰 and 𝒱 (the costly part).
  bool kernels = true;
};

/// Kernel parameters for a spec: the critical prescriptions when the pair is
/// critical, otherwise r1 = (n-1)/2 - 1/p and r2 = (n-1)/2 - 1/q.
KernelParameters default_kernel_parameters(int n, const ExponentPair& pq, double offset = 0.1);

/// Throws std::invalid_argument when the record does not belong to spec, has no
/// stored profiles, or r1, r2 <= -1.
FunctionalSeries extract(const SolutionRecord& record, const ProblemSpec& spec, double r1, double r2,
                         const ExtractOptions& options = {});

/// I_j[f] = (m_j(0)/2) ∫ f Φ dx for the four data components (amplitude included,
/// ε excluded), by Gauss-Legendre quadrature of the bump.
InitialDataIntegrals data_integrals(const ProblemSpec& spec);

/// U1 ≥ ε I1[u0], V1 ≥ ε I2[v0], U2 ≥ ε I1[u1] at every sample.
std::vector<BoundCheck> check_floor_bounds(const FunctionalSeries& series,
                                           const InitialDataIntegrals& integrals, double eps,
                                           double slack = kFloorSlack);

/// ∫|v|^q ≥ c (1+t)^{n-1-(n-1)q/2} and ∫|u_t|^p ≥ c (1+t)^{n-1-(n-1)p/2} on
/// [1, end of record), with c fitted at t = 1.
std::vector<BoundCheck> check_nonlinearity_bounds(const SolutionRecord& record, const ProblemSpec& spec,
                                                  double slack = kFloorSlack);

struct IdentityResiduals {
  double curlyU = 0.0;
  double curlyV = 0.0;
  std::vector<double> checkpoints;
};

/// Both sides of the integral identities for 𝒰 and 𝒱 at `checkpoints` sample
/// instants spread over the record; returns the largest relative residuals.
/// Requires b1 = b2 = 0.
IdentityResiduals check_fundamental_identity(const SolutionRecord& record, const ProblemSpec& spec,
                                             double r1, double r2, int checkpoints = 8,
                                             const ExtractOptions& options = {});

/// 𝒰 ≥ c log t (CurlyULog) and/or 𝒱 ≥ c log(2t/3) (CurlyVLog) on [e, end),
/// c fitted at t = e. Requires a critical pair and zero damping.
std::vector<BoundCheck> check_log_seeds(const FunctionalSeries& series, const ProblemSpec& spec,
                                        double eps, double slack = kFloorSlack);

/// U'(t) ≥ m1(0) U'(0) at every sample.
BoundCheck check_uprime_floor(const FunctionalSeries& series, const ProblemSpec& spec,
                              double slack = kFloorSlack);

/// Largest relative residual of U'' + b1 U' = ∫|v|^q at interior samples up to
/// t_hi, with U'' from divided differences of the U' series.
double ode_residual(const FunctionalSeries& series, const ProblemSpec& spec,
                    double t_hi = std::numeric_limits<double>::infinity());

/// Largest relative gap between divided differences of U and the U' series up to t_hi.
double derivative_residual(const FunctionalSeries& series,
                           double t_hi = std::numeric_limits<double>::infinity());

/// Columns t,U,Uprime,V,Vprime,U1,V1,U2,curlyU,curlyV (kernel columns empty
/// when absent).
void write_series_csv(std::ostream& out, const FunctionalSeries& series);

/// JSON array of {bound_id, min_margin, window, pass}.
void write_checks_json(std::ostream& out, const std::vector<BoundCheck>& checks);

bool all_passed(const std::vector<BoundCheck>& checks);

}  // namespace mixedwave

#endif  // MIXEDWAVE_FUNCTIONALS_HPP
