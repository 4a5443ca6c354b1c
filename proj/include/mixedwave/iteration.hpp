#ifndef MIXEDWAVE_ITERATION_HPP
#define MIXEDWAVE_ITERATION_HPP

// Lower-bound iteration sequences. Coefficients (C_j, K_j, D_j) are doubly
// exponential in j and are therefore carried as logarithms throughout.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mixedwave/model.hpp"

namespace mixedwave {

inline constexpr int kMaxIterations = 60;

enum class SequenceFamily { SubcriticalC, SubcriticalK, Theta1, Theta2, Double };
enum class CriticalCase { Theta1, Theta2, Double };

std::string_view to_string(SequenceFamily family);
std::string_view to_string(CriticalCase c);
CriticalCase critical_case_from_string(std::string_view name);

/// Frame constants without a fixed value. C, K come from the iteration frame,
/// Ctilde, Ktilde from the first lower bounds, m1_0 and m2_0 are the multipliers at t = 0.
struct FrameConstants {
  double C = 1.0;
  double K = 1.0;
  double Ctilde = 1.0;
  double Ktilde = 1.0;
  double m1_0 = 1.0;
  double m2_0 = 1.0;

  void validate() const;
};

struct IterationConstants {
  FrameConstants frame;
  // Subcritical.
  double M = 0.0, N = 0.0, Mtilde = 0.0, Ntilde = 0.0;
  // Critical, Θ1 = 0.
  double Mcrit = 0.0, Ncrit = 0.0, E = 0.0;
  // Critical, Θ2 = 0.
  double M1 = 0.0, N1 = 0.0, E1 = 0.0;
  // Critical, Θ1 = Θ2 = 0.
  double M2 = 0.0, N2 = 0.0, E2 = 0.0;
  /// pq/(pq-1)^2
  double S = 0.0;
};

IterationConstants derive_constants(int n, const ExponentPair& pq, const FrameConstants& frame = {});

struct SequenceTable {
  SequenceFamily family = SequenceFamily::SubcriticalC;
  int n = 0;
  double p = 0.0;
  double q = 0.0;
  double eps = 1.0;
  std::vector<int> j;
  std::vector<double> coeff_log;
  std::vector<double> coeff_log_closed;
  /// Explicit lower bound for coeff_log derived from the representation formulas.
  std::vector<double> coeff_log_lower;
  std::vector<double> t_power;
  std::vector<double> t_power_closed;
  std::vector<double> weight_power;
  std::vector<double> weight_power_closed;
  /// Slicing points 2 - 2^{-j}; empty for subcritical families.
  std::vector<double> ell;

  std::size_t size() const { return j.size(); }
  /// Largest relative disagreement between recursion and closed-form columns.
  double max_relative_gap() const;
};

/// |a-b| / max(|a|, |b|, 1)
double relative_gap(double a, double b);

struct SubcriticalTables {
  SequenceTable C;  // (C_j, a_j, b_j): lower bounds for V
  SequenceTable K;  // (K_j, α_j, β_j): lower bounds for U'
};

SubcriticalTables subcritical_sequences(int n, const ExponentPair& pq, int j_max, double eps = 1.0,
                                        const FrameConstants& frame = {});

/// Requires (p,q) on the matching critical branch within tol.
SequenceTable critical_sequences(CriticalCase c, int n, const ExponentPair& pq, int j_max,
                                 double eps = 1.0, const FrameConstants& frame = {},
                                 double tol = kEqualityTolerance);

/// p on the requested critical branch for given n and q (Θ1 = 0 or Θ2 = 0).
/// For Double the cusp p is returned and q is ignored.
double critical_curve_p(CriticalCase c, int n, double q);

struct GeometricSums {
  double first_direct = 0.0;
  double first_closed = 0.0;
  double second_direct = 0.0;
  double second_closed = 0.0;
};

/// Σ_{k<j} x^k and Σ_{k<j} (j-k) x^k, by summation and by closed form.
GeometricSums geometric_sums(double x, int j);

struct SeriesS {
  std::vector<double> partial;  // partial[j-1] = S_j
  double limit = 0.0;
};

/// S_j = Σ_{k=1}^j k (pq)^{-k} and S = pq/(pq-1)^2.
SeriesS series_S(double pq_product, int j_max);

struct ThresholdTime {
  LifespanKind kind = LifespanKind::None;
  /// log T; for the exponential kinds T = exp(exp(log_log_T)).
  double log_T = 0.0;
  double log_log_T = 0.0;
  std::string formula_id;

  double T() const;
};

ThresholdTime threshold_time(int n, const ExponentPair& pq, double eps,
                             const IterationConstants& consts, double tol = kEqualityTolerance);

/// Divergence driver (ε^p J, ε^q J̃, H, H1 or H2) at time exp(log_t); the lower-bound
/// sequence diverges when it exceeds 1. formula_id selects the branch as returned by
/// threshold_time.
double divergence_driver(std::string_view formula_id, int n, const ExponentPair& pq, double eps,
                         double log_t, const IterationConstants& consts);

bool divergence_certificate(const SequenceTable& table, double eps, double t,
                            const IterationConstants& consts);

struct KernelParameters {
  double r1 = 0.0;
  double r2 = 0.0;
  /// |((n-1)/2 - 1/p) - (n-1 - (n-1)q/2)| and |((n-1)/2 - 1/q) - (n - (n-1)p/2)|;
  /// only meaningful for Double.
  double identity_residual1 = 0.0;
  double identity_residual2 = 0.0;
};

KernelParameters r_parameters(CriticalCase c, int n, const ExponentPair& pq, double offset = 0.1,
                              double tol = kEqualityTolerance);

void write_csv(std::ostream& out, const SequenceTable& table);

}  // namespace mixedwave

#endif  // MIXEDWAVE_ITERATION_HPP
