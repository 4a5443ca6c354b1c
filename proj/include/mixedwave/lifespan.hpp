#ifndef MIXEDWAVE_LIFESPAN_HPP
#define MIXEDWAVE_LIFESPAN_HPP

// ε-sweeps of the solver and log-log fits of the numerical lifespan.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mixedwave/model.hpp"
#include "mixedwave/solver.hpp"

namespace mixedwave {

/// Grid-refinement change allowed per accepted row.
inline constexpr double kGridChangeTolerance = 0.05;
/// Relative band around the model exponent for the within-band flag.
inline constexpr double kSlopeBand = 0.4;

struct SweepConfig {
  ProblemSpec base;
  /// Strictly decreasing, all > 0.
  std::vector<double> eps_values;
  /// Run r uses dr / 2^r; T_numeric comes from the finest run.
  int repeats = 2;

  void validate() const;
};

struct LifespanRow {
  double eps = 0.0;
  /// Blow-up time on the finest grid; NaN when that run did not blow up.
  double T_numeric = 0.0;
  bool blew_up = false;
  /// ε^exponent of the model prediction: T for PowerLaw, log T for the
  /// exponential kinds (unit constant).
  double T_predicted_shape = 0.0;
  /// |T(dr) - T(dr/2)| / T(dr/2) between the two finest repeats; NaN if absent.
  double grid_change = 0.0;
  RunStatus status = RunStatus::Completed;
  /// Largest light-cone leak over the row's runs.
  double light_cone = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// 95% Student-t half-width of the slope (0 for two points or an exact fit).
  double ci_halfwidth = 0.0;
  int points = 0;
};

struct LifespanTable {
  int n = 0;
  double p = 0.0;
  double q = 0.0;
  Region region = Region::Supercritical;
  LifespanPrediction prediction;
  std::vector<LifespanRow> rows;
  /// log T against log ε over blown-up rows; absent with fewer than 2 of them.
  std::optional<LinearFit> fit;
};

/// Runs one solver call per (ε, repeat). Solver errors become NumericalFailure
/// rows instead of aborting.
LifespanTable sweep(const SweepConfig& cfg);

/// Least squares of y on x with a 95% confidence half-width for the slope.
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingVerdict {
  double slope = 0.0;
  double ci_halfwidth = 0.0;
  double model_exponent = 0.0;
  /// slope < 0 and |slope| <= (1 + kSlopeBand)|model_exponent|.
  bool consistent = false;
  /// |slope - model_exponent| <= kSlopeBand |model_exponent|.
  bool within_band = false;
};

/// Throws std::invalid_argument with fewer than 3 blown-up rows.
ScalingVerdict fit_scaling(const LifespanTable& table, double model_exponent);

/// T_numeric nonincreasing in ε over blown-up rows, up to `tolerance` in time.
bool lifespan_monotone(const LifespanTable& table, double tolerance);

/// Largest grid_change over blown-up rows.
double max_grid_change(const LifespanTable& table);

/// Rows ordered by ε descending; columns eps,T_numeric,blew_up,T_predicted_shape,
/// grid_change,status; 17 significant digits.
void write_csv(std::ostream& out, const LifespanTable& table);
/// Reads the rows written by write_csv; metadata is left default.
LifespanTable parse_csv(std::istream& in);

/// Deterministic JSON summary: sweep metadata, fit, prediction and the ε0 caveat.
void write_summary_json(std::ostream& out, const LifespanTable& table,
                        const std::optional<ScalingVerdict>& verdict);

}  // namespace mixedwave

#endif  // MIXEDWAVE_LIFESPAN_HPP
