#include "mixedwave/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mixedwave/model.hpp"

namespace mixedwave {

namespace {

const QuadratureRule& reference_legendre() {
  static const QuadratureRule rule = gauss_jacobi(16, 0.0, 0.0);
  return rule;
}

template <class F>
double integrate_panel(F&& f, double a, double b) {
  const QuadratureRule& rule = reference_legendre();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return half * sum;
}

constexpr double kHypothesisSlack = 1e-12;

}  // namespace

std::string_view to_string(DampingFamily family) {
  switch (family) {
    case DampingFamily::Zero: return "zero";
    case DampingFamily::PowerDecay: return "power";
    case DampingFamily::ExpDecay: return "exp";
  }
  return "unknown";
}

DampingFamily damping_family_from_string(std::string_view name) {
  if (name == "zero" || name == "Zero") return DampingFamily::Zero;
  if (name == "power" || name == "PowerDecay") return DampingFamily::PowerDecay;
  if (name == "exp" || name == "ExpDecay") return DampingFamily::ExpDecay;
  throw std::invalid_argument("unknown damping family '" + std::string(name) + "'");
}

void DampingSpec::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("damping amplitude must be >= 0");
  if (family == DampingFamily::PowerDecay && !(beta > 1.0)) {
    throw std::invalid_argument("PowerDecay damping needs beta > 1 (integrable coefficient)");
  }
}

double DampingSpec::b(double t) const {
  switch (family) {
    case DampingFamily::Zero: return 0.0;
    case DampingFamily::PowerDecay: return mu * std::pow(1.0 + t, -beta);
    case DampingFamily::ExpDecay: return mu * std::exp(-t);
  }
  return 0.0;
}

double DampingSpec::tail(double t) const {
  switch (family) {
    case DampingFamily::Zero: return 0.0;
    case DampingFamily::PowerDecay: return mu * std::pow(1.0 + t, 1.0 - beta) / (beta - 1.0);
    case DampingFamily::ExpDecay: return mu * std::exp(-t);
  }
  return 0.0;
}

double multiplier(const DampingSpec& b, double t) {
  b.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("multiplier needs t >= 0");
  return std::exp(-b.tail(t));
}

double sphere_area(int n) {
  require_dimension(n);
  const double half = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double phi_scaled(int n, double radius) {
  require_dimension(n);
  if (!(radius >= 0.0)) throw std::invalid_argument("phi needs a nonnegative radius");
  if (n == 1) return 1.0 + std::exp(-2.0 * radius);

  // |S^{n-2}| ∫_0^π e^{r(cosθ-1)} sin^{n-2}θ dθ on panels that widen geometrically
  // away from the peak at θ = 0, whose width is about r^{-1/2}.
  const int power = n - 2;
  auto integrand = [radius, power](double theta) {
    const double s = std::sin(theta);
    double value = std::exp(-radius * 2.0 * std::pow(std::sin(0.5 * theta), 2));
    for (int k = 0; k < power; ++k) value *= s;
    return value;
  };
  const double width = 1.0 / std::sqrt(std::max(radius, 1.0));
  double sum = 0.0;
  double a = 0.0;
  double b = width;
  while (a < std::numbers::pi) {
    b = std::min(b, std::numbers::pi);
    sum += integrate_panel(integrand, a, b);
    a = b;
    b = 2.0 * b;
  }
  return sphere_area(n - 1) * sum;
}

double phi(int n, double radius) { return std::exp(radius) * phi_scaled(n, radius); }

double psi(int n, double t, double radius) {
  if (!(t >= 0.0)) throw std::invalid_argument("psi needs t >= 0");
  return std::exp(radius - t) * phi_scaled(n, radius);
}

double sinhc(double y) {
  if (std::abs(y) < 1e-4) {
    const double y2 = y * y;
    return 1.0 + y2 / 6.0 + y2 * y2 / 120.0;
  }
  return std::sinh(y) / y;
}

void KernelConfig::validate() const {
  if (!(r > -1.0)) throw std::invalid_argument("kernel exponent r must exceed -1");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("kernel cutoff lambda0 must be positive");
  if (!(R > 0.0)) throw std::invalid_argument("support radius R must be positive");
  if (quad_nodes < 16) throw std::invalid_argument("kernel quadrature needs at least 16 nodes");
}

KernelEvaluator::KernelEvaluator(const KernelConfig& cfg, int n) : cfg_(cfg), n_(n) {
  cfg_.validate();
  require_dimension(n);
  rule_ = power_weighted_rule(cfg_.quad_nodes, cfg_.r, cfg_.lambda0);
}

std::vector<double> KernelEvaluator::phi_table(double radius) const {
  std::vector<double> table(rule_.size());
  for (std::size_t k = 0; k < rule_.size(); ++k) table[k] = phi_scaled(n_, rule_.nodes[k] * radius);
  return table;
}

void KernelEvaluator::check_times(double t, double s) const {
  if (!(s >= 0.0)) throw std::invalid_argument("kernel needs s >= 0");
  if (!(s <= t)) throw std::invalid_argument("kernel needs s <= t");
}

double KernelEvaluator::eta(double t, double s, double radius) const {
  return eta(t, s, radius, phi_table(radius));
}

double KernelEvaluator::xi(double t, double s, double radius) const {
  return xi(t, s, radius, phi_table(radius));
}

double KernelEvaluator::eta(double t, double s, double radius, const std::vector<double>& phis,
                            int extra_power) const {
  check_times(t, s);
  const double shift = radius - cfg_.R - t;
  double sum = 0.0;
  for (std::size_t k = 0; k < rule_.size(); ++k) {
    const double lambda = rule_.nodes[k];
    const double w = rule_.weights[k] * std::pow(lambda, extra_power);
    sum += w * std::exp(lambda * shift) * sinhc(lambda * (t - s)) * phis[k];
  }
  return sum;
}

double KernelEvaluator::xi(double t, double s, double radius, const std::vector<double>& phis,
                           int extra_power) const {
  check_times(t, s);
  const double shift = radius - cfg_.R - t;
  double sum = 0.0;
  for (std::size_t k = 0; k < rule_.size(); ++k) {
    const double lambda = rule_.nodes[k];
    const double w = rule_.weights[k] * std::pow(lambda, extra_power);
    sum += w * std::exp(lambda * shift) * std::cosh(lambda * (t - s)) * phis[k];
  }
  return sum;
}

double eta(const KernelConfig& cfg, int n, double t, double s, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("kernel needs a nonnegative radius");
  return KernelEvaluator(cfg, n).eta(t, s, radius);
}

double xi(const KernelConfig& cfg, int n, double t, double s, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("kernel needs a nonnegative radius");
  return KernelEvaluator(cfg, n).xi(t, s, radius);
}

std::string_view to_string(KernelBound bound) {
  switch (bound) {
    case KernelBound::Xi0: return "Xi0";
    case KernelBound::Eta0: return "Eta0";
    case KernelBound::XiS: return "XiS";
    case KernelBound::EtaS: return "EtaS";
    case KernelBound::EtaDiag: return "EtaDiag";
  }
  return "Unknown";
}

double kernel_bound_shape(KernelBound bound, int n, double r, const KernelSample& x) {
  switch (bound) {
    case KernelBound::Xi0: return 1.0;
    case KernelBound::Eta0: return 1.0 / bracket(x.t);
    case KernelBound::XiS: return std::pow(bracket(x.s), -r - 1.0);
    case KernelBound::EtaS: return std::pow(bracket(x.s), -r) / bracket(x.t);
    case KernelBound::EtaDiag:
      return std::pow(bracket(x.t), -0.5 * (n - 1)) *
             std::pow(bracket(x.t - x.radius), 0.5 * (n - 3) - r);
  }
  return 1.0;
}

void check_hypothesis(KernelBound bound, int n, const KernelConfig& cfg, const KernelSample& x) {
  auto fail = [bound](const std::string& why) {
    throw std::invalid_argument(std::string(to_string(bound)) + " sample violates hypothesis: " + why);
  };
  if (!(x.radius >= 0.0)) fail("radius < 0");
  switch (bound) {
    case KernelBound::Xi0:
    case KernelBound::Eta0:
      if (x.s != 0.0) fail("s must be 0");
      if (!(x.t >= 0.0)) fail("t < 0");
      if (x.radius > cfg.R + kHypothesisSlack) fail("|x| > R");
      break;
    case KernelBound::XiS:
    case KernelBound::EtaS:
      if (!(x.s >= 0.0) || !(x.t > x.s)) fail("need t > s >= 0");
      if (x.radius > x.s + cfg.R + kHypothesisSlack) fail("|x| > s + R");
      break;
    case KernelBound::EtaDiag:
      if (!(cfg.r > 0.5 * (n - 3))) fail("need r > (n-3)/2");
      if (x.s != x.t) fail("diagonal bound needs s = t");
      if (!(x.t > 0.0)) fail("t <= 0");
      if (x.radius > x.t + cfg.R + kHypothesisSlack) fail("|x| > t + R");
      break;
  }
}

BoundReport verify_kernel_bound(const KernelConfig& cfg, int n, KernelBound bound,
                                const std::vector<KernelSample>& samples) {
  require_dimension(n, 2);
  if (samples.empty()) throw std::invalid_argument("kernel bound check needs samples");
  for (const auto& x : samples) check_hypothesis(bound, n, cfg, x);

  const KernelEvaluator evaluator(cfg, n);
  std::map<double, std::vector<double>> tables;
  const bool upper = bound == KernelBound::EtaDiag;
  const bool uses_xi = bound == KernelBound::Xi0 || bound == KernelBound::XiS;

  double t_top = 0.0;
  for (const auto& x : samples) t_top = std::max(t_top, x.t);
  const double t_half = 0.5 * t_top;

  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo = inf, hi = -inf, lo_half = inf, hi_half = -inf;
  bool finite = true;
  for (const auto& x : samples) {
    auto it = tables.find(x.radius);
    if (it == tables.end()) it = tables.emplace(x.radius, evaluator.phi_table(x.radius)).first;
    const double kernel = uses_xi ? evaluator.xi(x.t, x.s, x.radius, it->second)
                                  : evaluator.eta(x.t, x.s, x.radius, it->second);
    const double ratio = kernel / kernel_bound_shape(bound, n, cfg.r, x);
    if (!std::isfinite(ratio)) finite = false;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    if (x.t <= t_half) {
      lo_half = std::min(lo_half, ratio);
      hi_half = std::max(hi_half, ratio);
    }
  }

  BoundReport report;
  report.bound_id = bound;
  report.min_ratio = lo;
  report.max_ratio = hi;
  report.samples = static_cast<int>(samples.size());
  const double full = upper ? hi : lo;
  const double half = upper ? hi_half : lo_half;
  report.drift = std::isfinite(half) && half != 0.0 ? std::abs(full - half) / std::abs(half) : inf;
  report.stable = report.drift < kStabilizationTolerance;
  const bool sign_ok = upper ? std::isfinite(hi) : lo > 0.0;
  report.passed = finite && sign_ok && report.stable;
  return report;
}

std::vector<KernelSample> kernel_bound_grid(KernelBound bound, const KernelConfig& cfg,
                                            double t_max, int time_points, int radius_points) {
  if (!(t_max > 0.0) || time_points < 3 || radius_points < 2) {
    throw std::invalid_argument("kernel grid needs t_max > 0, >= 3 times, >= 2 radii");
  }
  std::vector<double> times(time_points);
  for (int i = 0; i < time_points; ++i) times[i] = t_max * i / (time_points - 1);
  auto radii = [radius_points](double top) {
    std::vector<double> out(radius_points);
    for (int i = 0; i < radius_points; ++i) out[i] = top * i / (radius_points - 1);
    return out;
  };

  std::vector<KernelSample> samples;
  switch (bound) {
    case KernelBound::Xi0:
    case KernelBound::Eta0:
      for (double t : times)
        for (double rho : radii(cfg.R)) samples.push_back({t, 0.0, rho});
      break;
    case KernelBound::XiS:
    case KernelBound::EtaS:
      for (std::size_t i = 0; i + 1 < times.size(); ++i)
        for (std::size_t j = i + 1; j < times.size(); ++j)
          for (double rho : radii(times[i] + cfg.R)) samples.push_back({times[j], times[i], rho});
      break;
    case KernelBound::EtaDiag:
      for (std::size_t j = 1; j < times.size(); ++j)
        for (double rho : radii(times[j] + cfg.R)) samples.push_back({times[j], times[j], rho});
      break;
  }
  return samples;
}

std::vector<BoundReport> verify_kernel_bounds(const KernelConfig& cfg, int n, double t_max,
                                              int time_points, int radius_points) {
  require_dimension(n, 2);
  std::vector<BoundReport> reports;
  for (KernelBound bound : {KernelBound::Xi0, KernelBound::Eta0, KernelBound::XiS,
                            KernelBound::EtaS, KernelBound::EtaDiag}) {
    if (bound == KernelBound::EtaDiag && !(cfg.r > 0.5 * (n - 3))) continue;
    reports.push_back(verify_kernel_bound(
        cfg, n, bound, kernel_bound_grid(bound, cfg, t_max, time_points, radius_points)));
  }
  return reports;
}

PhiBand phi_asymptotic_band(int n, double radius_max, int samples) {
  if (samples < 2 || !(radius_max > 0.0)) throw std::invalid_argument("phi band needs a grid");
  PhiBand band{std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < samples; ++i) {
    const double radius = radius_max * i / (samples - 1);
    const double value = phi_scaled(n, radius) * std::pow(bracket(radius), 0.5 * (n - 1));
    band.lower = std::min(band.lower, value);
    band.upper = std::max(band.upper, value);
  }
  return band;
}

double psi_moment(int n, double exponent, double t, double R) {
  require_dimension(n);
  if (!(exponent > 1.0)) throw std::invalid_argument("psi_moment needs exponent > 1");
  if (!(t >= 0.0)) throw std::invalid_argument("psi_moment needs t >= 0");
  if (!(R > 0.0)) throw std::invalid_argument("psi_moment needs R > 0");
  const double top = R + t;
  auto integrand = [&](double rho) {
    return std::exp(exponent * (rho - t)) * std::pow(phi_scaled(n, rho), exponent) *
           std::pow(rho, n - 1);
  };
  const int panels = std::max(1, static_cast<int>(std::ceil(top)));
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    sum += integrate_panel(integrand, top * i / panels, top * (i + 1) / panels);
  }
  return sphere_area(n) * sum;
}

}  // namespace mixedwave
