#ifndef MIXEDWAVE_CONFIG_HPP
#define MIXEDWAVE_CONFIG_HPP

// JSON run configuration with sections
//
//   problem  {n, p, q, R, eps, nonlinear, enforce_hypotheses}
//   grid     {dr, r_max, cfl, t_max, blowup_threshold, output_samples, growth_limit, max_refinements}
//   damping1 {family: zero|power|exp, mu, beta}     (same for damping2)
//   data     {k, a_u0, a_u1, a_v0, a_v1}
//   kernels  {lambda0, quad_nodes, offset, r1, r2}
//   sweep    {eps: [...], repeats}
//
// Every field is optional; unknown keys are errors.

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mixedwave/solver.hpp"

namespace mixedwave {

struct KernelSettings {
  double lambda0 = 1.0;
  int quad_nodes = 64;
  /// Offset for the strict-inequality kernel parameter in the critical cases.
  double offset = 0.1;
  /// Explicit values override the defaults derived from (n, p, q).
  std::optional<double> r1;
  std::optional<double> r2;
};

struct SweepSettings {
  std::vector<double> eps_values{1.0, 0.8, 0.6};
  int repeats = 2;
};

struct RunConfig {
  ProblemSpec problem;
  KernelSettings kernels;
  SweepSettings sweep;
};

/// Malformed or invalid configuration. line/column are 1-based and 0 when the
/// error is not tied to a text position.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
void write_config_json(std::ostream& out, const RunConfig& cfg);

}  // namespace mixedwave

#endif  // MIXEDWAVE_CONFIG_HPP
