#ifndef MIXEDWAVE_SPECFUN_HPP
#define MIXEDWAVE_SPECFUN_HPP

// Special functions of the blow-up argument: the eigenfunction
//
//   Φ(x) = ∫_{S^{n-1}} e^{x·ω} dσ_ω   (Φ(x) = e^x + e^{-x} when n = 1),  ΔΦ = Φ,
//
// the weight Ψ(t,x) = e^{-t}Φ(x), the damping multipliers m(t) = exp(-∫_t^∞ b),
// and the kernels
//
//   η_r(t,s,x) = ∫_0^{λ0} e^{-λ(R+t)} sinh(λ(t-s))/(λ(t-s)) Φ(λx) λ^r dλ,
//   ξ_r(t,s,x) = ∫_0^{λ0} e^{-λ(R+t)} cosh(λ(t-s))          Φ(λx) λ^r dλ.
//
// Φ grows like e^{|x|}, so the evaluators work with the scaled value e^{-|x|}Φ(x).

#include <string_view>
#include <vector>

#include "mixedwave/quadrature.hpp"

namespace mixedwave {

enum class DampingFamily { Zero, PowerDecay, ExpDecay };

std::string_view to_string(DampingFamily family);
DampingFamily damping_family_from_string(std::string_view name);

struct DampingSpec {
  DampingFamily family = DampingFamily::Zero;
  double mu = 0.0;
  double beta = 2.0;

  /// Throws std::invalid_argument for mu < 0 or PowerDecay with beta <= 1.
  void validate() const;
  double b(double t) const;
  /// ∫_t^∞ b(τ) dτ
  double tail(double t) const;
  bool is_zero() const { return family == DampingFamily::Zero || mu == 0.0; }
};

/// exp(-tail(t)); non-decreasing with m(0) <= m(t) <= 1.
double multiplier(const DampingSpec& b, double t);

/// |S^{n-1}| = 2π^{n/2}/Γ(n/2); equals 2 for n = 1.
double sphere_area(int n);

/// e^{-radius} Φ(radius).
double phi_scaled(int n, double radius);
double phi(int n, double radius);
double psi(int n, double t, double radius);

/// ⟨y⟩ = 3 + |y|
inline double bracket(double y) { return 3.0 + (y < 0 ? -y : y); }

/// sinh(y)/y with the removable singularity handled by series for |y| < 1e-4.
double sinhc(double y);

struct KernelConfig {
  double r = 0.0;
  double lambda0 = 1.0;
  double R = 1.0;
  int quad_nodes = 64;

  void validate() const;
};

/// λ-quadrature for the kernels. The λ^r weight is absorbed into a Gauss-Jacobi
/// rule, so only smooth factors are sampled.
class KernelEvaluator {
 public:
  KernelEvaluator(const KernelConfig& cfg, int n);

  const KernelConfig& config() const { return cfg_; }
  int dimension() const { return n_; }
  const QuadratureRule& rule() const { return rule_; }

  /// e^{-λ_k ρ} Φ(λ_k ρ) at every node.
  std::vector<double> phi_table(double radius) const;

  double eta(double t, double s, double radius) const;
  double xi(double t, double s, double radius) const;

  /// Same kernels from a precomputed phi_table; extra_power raises λ^r to
  /// λ^{r+extra_power}.
  double eta(double t, double s, double radius, const std::vector<double>& phis,
             int extra_power = 0) const;
  double xi(double t, double s, double radius, const std::vector<double>& phis,
            int extra_power = 0) const;

 private:
  void check_times(double t, double s) const;

  KernelConfig cfg_;
  int n_;
  QuadratureRule rule_;
};

double eta(const KernelConfig& cfg, int n, double t, double s, double radius);
double xi(const KernelConfig& cfg, int n, double t, double s, double radius);

enum class KernelBound { Xi0, Eta0, XiS, EtaS, EtaDiag };

std::string_view to_string(KernelBound bound);

struct KernelSample {
  double t = 0.0;
  double s = 0.0;
  double radius = 0.0;
};

struct BoundReport {
  KernelBound bound_id = KernelBound::Xi0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  int samples = 0;
  /// Relative change of the tracked extreme between the half and the full t-range.
  double drift = 0.0;
  bool stable = false;
  bool passed = false;
};

/// Relative drift above which an extreme is considered not stabilized.
inline constexpr double kStabilizationTolerance = 0.2;

/// Lower-bound shape for Xi0/Eta0/XiS/EtaS, upper-bound shape for EtaDiag.
double kernel_bound_shape(KernelBound bound, int n, double r, const KernelSample& sample);

/// Throws std::invalid_argument if the sample violates the bound's hypothesis.
void check_hypothesis(KernelBound bound, int n, const KernelConfig& cfg,
                      const KernelSample& sample);

BoundReport verify_kernel_bound(const KernelConfig& cfg, int n, KernelBound bound,
                                const std::vector<KernelSample>& samples);

/// Hypothesis-conforming sample grid on t in [0, t_max].
std::vector<KernelSample> kernel_bound_grid(KernelBound bound, const KernelConfig& cfg,
                                            double t_max, int time_points, int radius_points);

/// Runs all bounds applicable for cfg.r (EtaDiag needs r > (n-3)/2). Requires n >= 2.
std::vector<BoundReport> verify_kernel_bounds(const KernelConfig& cfg, int n,
                                              double t_max = 50.0, int time_points = 26,
                                              int radius_points = 9);

struct PhiBand {
  double lower = 0.0;
  double upper = 0.0;
};

/// Range of Φ(x)⟨x⟩^{(n-1)/2}e^{-|x|} over radius in [0, radius_max].
PhiBand phi_asymptotic_band(int n, double radius_max, int samples);

/// ∫_{B_{R+t}} Ψ(t,x)^exponent dx.
double psi_moment(int n, double exponent, double t, double R);

}  // namespace mixedwave

#endif  // MIXEDWAVE_SPECFUN_HPP
