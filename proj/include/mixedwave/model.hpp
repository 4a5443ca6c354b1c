#ifndef MIXEDWAVE_MODEL_HPP
#define MIXEDWAVE_MODEL_HPP

// Exponent algebra for the coupled system
//
//   u_tt - Δu + b1(t) u_t = |v|^q,   v_tt - Δv + b2(t) v_t = |u_t|^p
//
// Two lifespan exponents govern the blow-up picture:
//
//   Θ1(n,p,q) = (q + 1 + 1/p)/(pq - 1) - (n-1)/2
//   Θ2(n,p,q) = (2 + 1/q)/(pq - 1)     - (n-1)/2
//
// max{Θ1, Θ2} > 0 is the blow-up (subcritical) region; the critical curve is
// max{Θ1, Θ2} = 0 and its two branches meet at the cusp (p_mix, q_mix).

#include <string>
#include <string_view>

namespace mixedwave {

/// Default tolerance for deciding Θ = 0.
inline constexpr double kEqualityTolerance = 1e-9;

class ExponentPair {
 public:
  /// Throws std::invalid_argument unless p > 1 and q > 1.
  ExponentPair(double p, double q);

  double p() const { return p_; }
  double q() const { return q_; }
  double product() const { return p_ * q_; }

 private:
  double p_;
  double q_;
};

enum class Region { Subcritical, CriticalTheta1, CriticalTheta2, DoubleCritical, Supercritical };

std::string_view to_string(Region region);

struct CriticalData {
  int n = 0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  Region region = Region::Supercritical;

  double max_theta() const { return theta1 > theta2 ? theta1 : theta2; }
};

struct CuspPoint {
  double p_mix = 0.0;
  double q_mix = 0.0;
  double p_strauss = 0.0;
  double p_glassey = 0.0;

  /// q_mix < p_glassey < p_strauss < p_mix
  bool ordered() const;
  ExponentPair pair() const { return ExponentPair(p_mix, q_mix); }
};

struct CuspResiduals {
  double cubic = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

enum class LifespanKind { PowerLaw, ExpTheta1, ExpTheta2, ExpDouble, None };

std::string_view to_string(LifespanKind kind);

/// Predicted ε-scaling of the lifespan. For PowerLaw, T ≲ ε^exponent; for the
/// exponential kinds, log T ≲ ε^exponent.
struct LifespanPrediction {
  LifespanKind kind = LifespanKind::None;
  double exponent = 0.0;
};

void require_dimension(int n, int minimum = 1);

double theta1(int n, const ExponentPair& pq);
double theta2(int n, const ExponentPair& pq);

CriticalData classify(int n, const ExponentPair& pq, double tol = kEqualityTolerance);

/// Positive root of (n-1)p^2 - (n+1)p - 2 = 0. Requires n >= 2.
double strauss_exponent(int n);
/// (n+1)/(n-1). Requires n >= 2.
double glassey_exponent(int n);

/// Closed-form cusp coordinates together with the two reference exponents.
CuspPoint cusp_exponents(int n);

/// Cubic (n+1)q^3 - (n+1)/2 q^2 - (n+5)/2 q - 1 whose admissible root is q_mix.
double cusp_cubic(int n, double q);

/// p on the Θ1 = Θ2 locus: p = 1/(1 + 1/q - q). Requires 1 < q < golden ratio.
double cusp_p_from_q(double q);

/// Residuals of the cusp at its closed-form coordinates: (cubic, Θ1, Θ2).
CuspResiduals cusp_residuals(int n);

LifespanPrediction lifespan_prediction(int n, const ExponentPair& pq,
                                       double tol = kEqualityTolerance);

}  // namespace mixedwave

#endif  // MIXEDWAVE_MODEL_HPP
