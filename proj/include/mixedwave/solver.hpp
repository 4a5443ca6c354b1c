#ifndef MIXEDWAVE_SOLVER_HPP
#define MIXEDWAVE_SOLVER_HPP

// Radially symmetric leapfrog solver for
//
//   u_tt - u_rr - (n-1)/r u_r + b1(t) u_t = |v|^q,
//   v_tt - v_rr - (n-1)/r v_r + b2(t) v_t = |u_t|^p,
//
// on [0, r_max] with a ghost-node axis condition and a homogeneous Dirichlet outer
// node placed outside the light cone |x| <= t + R.

#include <optional>
#include <string_view>
#include <vector>

#include "mixedwave/model.hpp"
#include "mixedwave/specfun.hpp"

namespace mixedwave {

/// Bump profile A (1 - ρ²/R²)_+^k; data are ε times these.
struct InitialDataFamily {
  int k = 24;
  double a_u0 = 1.0;
  double a_u1 = 1.0;
  double a_v0 = 1.0;
  double a_v1 = 1.0;

  double bump(double rho, double R) const;
};

/// Largest Courant number for which the undamped leapfrog scheme on the
/// radial operator is stable. 1 for n = 1; the axis row lowers it for n >= 2.
double stable_cfl_limit(int n);

/// Fraction of the stability limit used when the CFL number is left on auto.
inline constexpr double kAutoCflFraction = 0.95;

struct GridSpec {
  double dr = 0.01;
  /// 0 selects R + t_max + 4 dr.
  double r_max = 0.0;
  /// 0 selects kAutoCflFraction * stable_cfl_limit(n).
  double cfl = 0.0;
  double t_max = 10.0;
  double blowup_threshold = 1e8;
  int output_samples = 2000;
  /// Per-step growth of max(|u|,|v|) that triggers dt halving.
  double growth_limit = 10.0;
  int max_refinements = 30;
  bool store_profiles = true;
};

struct ProblemSpec {
  int n = 3;
  ExponentPair pq{2.0, 2.0};
  DampingSpec b1;
  DampingSpec b2;
  double R = 1.0;
  double eps = 1.0;
  InitialDataFamily data;
  GridSpec grid;
  /// false drops both source terms (linear test problems).
  bool nonlinear = true;
  /// false admits sign-changing or vanishing data (negative controls).
  bool enforce_hypotheses = true;

  /// Throws std::invalid_argument describing the first violated condition.
  void validate() const;
  double r_max() const;
  double cfl() const;
  double dt() const { return cfl() * grid.dr; }
};

enum class RunStatus { Completed, BlewUp, NumericalFailure };

std::string_view to_string(RunStatus status);

struct SupNorms {
  double u = 0.0;
  double ut = 0.0;
  double v = 0.0;

  double max() const;
};

struct SolutionRecord {
  int n = 0;
  double dr = 0.0;
  double R = 0.0;
  double threshold = 0.0;
  std::vector<double> radii;
  /// Profile sample instants; profiles are empty when store_profiles is off.
  std::vector<double> times;
  std::vector<std::vector<double>> u, ut, v, vt;
  /// Discrete leapfrog energies ½|w^{n+1}-w^n|²/dt² + ½<D w^{n+1}, D w^n>, per sample.
  std::vector<double> energy_u, energy_v;
  /// Norm series; also holds the two levels bracketing a threshold crossing.
  std::vector<double> norm_times;
  std::vector<SupNorms> sup_norms;
  /// Largest |u|,|u_t|,|v|,|v_t| beyond t + R + 2 dr over all samples, tracked
  /// whether or not profiles are stored.
  double outside_cone = 0.0;
  RunStatus status = RunStatus::Completed;
  std::optional<double> t_blowup;
  double t_final = 0.0;
  double dt_final = 0.0;
  int refinements = 0;

  bool blew_up() const { return status == RunStatus::BlewUp; }
};

SolutionRecord run(const ProblemSpec& spec);

struct BlowupDetection {
  bool flag = false;
  std::optional<double> t_blowup;
};

/// First crossing of max(|u|,|u_t|,|v|) above threshold, interpolated linearly in
/// log-norm between the bracketing samples.
BlowupDetection detect_blowup(const std::vector<double>& times, const std::vector<SupNorms>& norms,
                              double threshold);

/// Largest |u|, |u_t|, |v|, |v_t| at radii beyond t + R + 2 dr over all samples.
/// Without stored profiles only R = record.R can be answered (from outside_cone).
double light_cone_check(const SolutionRecord& record, double R);

/// Conservative radial Laplacian
///
///   (Lw)_i = [ r_{i+1/2}^{n-1}(w_{i+1}-w_i) - r_{i-1/2}^{n-1}(w_i-w_{i-1}) ] / (dr m_i),
///
/// with m_i = ∫ r^{n-1} dr over the dual cell around r_i. At the axis this is
/// 2n (w_1 - w_0)/dr². The last node is a Dirichlet node and gets 0.
class RadialLaplacian {
 public:
  RadialLaplacian(int n, double dr, std::size_t count);

  std::size_t size() const { return volume_.size(); }
  const std::vector<double>& volumes() const { return volume_; }
  /// r_{i+1/2}^{n-1}
  const std::vector<double>& face_weights() const { return face_; }

  void apply(const std::vector<double>& w, std::vector<double>& out) const;
  /// Applies on nodes [0, last) only; out is left untouched elsewhere.
  void apply(const std::vector<double>& w, std::vector<double>& out, std::size_t last) const;

 private:
  double dr_;
  std::vector<double> volume_;
  std::vector<double> face_;
  std::vector<double> plus_;
  std::vector<double> minus_;
};

void radial_laplacian(int n, double dr, const std::vector<double>& w, std::vector<double>& out);

/// w_next = [2w - (1 - b dt/2) w_prev + dt² (Lw + F)] / (1 + b dt/2) on the interior
/// nodes; the outer node receives boundary_value.
void leapfrog_step(const std::vector<double>& w_prev, const std::vector<double>& w,
                   const std::vector<double>& lap, const std::vector<double>& forcing, double b,
                   double dt, double boundary_value, std::vector<double>& w_next);

/// ½∫(w_t² + w_r²) r^{n-1} dr by trapezoid with centred w_r.
double trapezoid_energy(int n, double dr, const std::vector<double>& w, const std::vector<double>& wt);

struct ManufacturedResult {
  double dr = 0.0;
  std::vector<double> errors;  // max-norm errors at dr, dr/2, dr/4
  std::vector<double> orders;  // log2 ratios of consecutive errors
};

/// Solves with exact solution e^{-t} cos r (constant damping b) and measures the
/// max-norm error at t_end on three nested grids.
ManufacturedResult manufactured_convergence(int n, double b, double dr, double t_end = 1.0,
                                            double length = 3.0, double cfl = 0.0);

}  // namespace mixedwave

#endif  // MIXEDWAVE_SOLVER_HPP
