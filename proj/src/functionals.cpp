#include "mixedwave/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mixedwave/quadrature.hpp"

namespace mixedwave {

namespace {

double abs_pow(double x, double e) {
  x = std::abs(x);
  return x == 0.0 ? 0.0 : std::pow(x, e);
}

// |S^{n-1}| × dual-cell volumes: a second-order rule for ∫ f(ρ) ρ^{n-1} dρ under
// which the discrete Laplacian integrates to zero, as in the scheme.
std::vector<double> radial_weights(int n, double dr, std::size_t count) {
  std::vector<double> w = RadialLaplacian(n, dr, count).volumes();
  const double area = sphere_area(n);
  for (double& x : w) x *= area;
  return w;
}

void check_record(const SolutionRecord& record, const ProblemSpec& spec) {
  if (record.n != spec.n || record.radii.empty() || std::abs(record.dr - spec.grid.dr) > 1e-14 * spec.grid.dr ||
      std::abs(record.R - spec.R) > 1e-14 * spec.R) {
    throw std::invalid_argument("solution record does not match the problem grid");
  }
  if (record.u.size() != record.times.size() || record.times.empty()) {
    throw std::invalid_argument("solution record carries no stored profiles");
  }
}

// Φ tables e^{-λ_k ρ_i}Φ(λ_k ρ_i) for every grid node up to `last`.
std::vector<std::vector<double>> phi_tables(const KernelEvaluator& kernel, const std::vector<double>& radii,
                                            std::size_t last) {
  std::vector<std::vector<double>> tables(radii.size());
  for (std::size_t i = 0; i < last; ++i) tables[i] = kernel.phi_table(radii[i]);
  return tables;
}

// Nodes beyond t_final + R + a margin hold exact zeros.
std::size_t support_end(const SolutionRecord& record) {
  const double reach = record.R + record.t_final + 4.0 * record.dr;
  const auto end = static_cast<std::size_t>(std::ceil(reach / record.dr)) + 1;
  return std::min(end, record.radii.size());
}

KernelEvaluator make_kernel(const ProblemSpec& spec, double r, const ExtractOptions& options) {
  KernelConfig cfg;
  cfg.r = r;
  cfg.R = spec.R;
  cfg.lambda0 = options.lambda0;
  cfg.quad_nodes = options.quad_nodes;
  return KernelEvaluator(cfg, spec.n);
}

// ∫ f(|x|) g(|x|) dx for the bump f over B_R, by Gauss-Legendre.
template <class G>
double bump_integral(const ProblemSpec& spec, G g) {
  static const QuadratureRule rule = gauss_legendre(64, 0.0, 1.0);
  double s = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double rho = spec.R * rule.nodes[k];
    s += rule.weights[k] * spec.data.bump(rho, spec.R) * g(rho) * std::pow(rho, spec.n - 1);
  }
  return sphere_area(spec.n) * spec.R * s;
}

double interpolate(const std::vector<double>& t, const std::vector<double>& y, double at) {
  const auto it = std::lower_bound(t.begin(), t.end(), at);
  if (it == t.begin()) return y.front();
  if (it == t.end()) return y.back();
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double a = (at - t[i - 1]) / (t[i] - t[i - 1]);
  return (1.0 - a) * y[i - 1] + a * y[i];
}

// Lower envelope check of y against c·shape(t) on t >= t0, c fitted at t0.
template <class Shape>
BoundCheck envelope(BoundId id, const std::vector<double>& t, const std::vector<double>& y, double t0,
                    double t_end, Shape shape, double slack) {
  BoundCheck check;
  check.bound_id = id;
  check.t_lo = t0;
  check.t_hi = t0;
  if (t.empty() || t.back() < t0) {
    check.pass = true;
    return check;
  }
  const double c = interpolate(t, y, t0) / shape(t0);
  check.reference = std::abs(c * shape(t0));
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] >= t_end) continue;
    margin = std::min(margin, y[i] - c * shape(t[i]));
    check.t_hi = t[i];
  }
  check.min_margin = std::isfinite(margin) ? margin : 0.0;
  check.pass = check.min_margin >= -slack * check.reference;
  return check;
}

}  // namespace

std::string_view to_string(BoundId id) {
  switch (id) {
    case BoundId::U1Floor: return "U1Floor";
    case BoundId::V1Floor: return "V1Floor";
    case BoundId::U2Floor: return "U2Floor";
    case BoundId::NonlinQ: return "NonlinQ";
    case BoundId::NonlinP: return "NonlinP";
    case BoundId::CurlyULog: return "CurlyULog";
    case BoundId::CurlyVLog: return "CurlyVLog";
    case BoundId::UprimeFloor: return "UprimeFloor";
  }
  return "Unknown";
}

KernelParameters default_kernel_parameters(int n, const ExponentPair& pq, double offset) {
  switch (classify(n, pq).region) {
    case Region::CriticalTheta1: return r_parameters(CriticalCase::Theta1, n, pq, offset);
    case Region::CriticalTheta2: return r_parameters(CriticalCase::Theta2, n, pq, offset);
    case Region::DoubleCritical: return r_parameters(CriticalCase::Double, n, pq, offset);
    default: break;
  }
  KernelParameters kp;
  kp.r1 = 0.5 * (n - 1) - 1.0 / pq.p();
  kp.r2 = 0.5 * (n - 1) - 1.0 / pq.q();
  return kp;
}

FunctionalSeries extract(const SolutionRecord& record, const ProblemSpec& spec, double r1, double r2,
                         const ExtractOptions& options) {
  check_record(record, spec);
  if (!(r1 > -1.0) || !(r2 > -1.0)) throw std::invalid_argument("kernel parameters must exceed -1");
  const int n = spec.n;
  const std::size_t count = record.radii.size();
  const std::size_t last = support_end(record);
  const auto w = radial_weights(n, record.dr, count);
  const double p = spec.pq.p();
  const double q = spec.pq.q();

  std::vector<double> phis(count, 0.0);
  for (std::size_t i = 0; i < last; ++i) phis[i] = phi_scaled(n, record.radii[i]);

  FunctionalSeries s;
  s.n = n;
  s.r1 = r1;
  s.r2 = r2;
  s.times = record.times;

  std::optional<KernelEvaluator> k1, k2;
  std::vector<std::vector<double>> tab1, tab2;
  if (options.kernels) {
    k1.emplace(make_kernel(spec, r1, options));
    k2.emplace(make_kernel(spec, r2, options));
    tab1 = phi_tables(*k1, record.radii, last);
    tab2 = phi_tables(*k2, record.radii, last);
  }

  for (std::size_t j = 0; j < record.times.size(); ++j) {
    const double t = record.times[j];
    const auto& u = record.u[j];
    const auto& ut = record.ut[j];
    const auto& v = record.v[j];
    const auto& vt = record.vt[j];
    double U = 0, Up = 0, V = 0, Vp = 0, U1 = 0, V1 = 0, U2 = 0, Su = 0, Sv = 0, cu = 0, cv = 0;
    for (std::size_t i = 0; i < last; ++i) {
      const double wi = w[i];
      const double psi = std::exp(record.radii[i] - t) * phis[i];
      U += wi * u[i];
      Up += wi * ut[i];
      V += wi * v[i];
      Vp += wi * vt[i];
      U1 += wi * u[i] * psi;
      V1 += wi * v[i] * psi;
      U2 += wi * ut[i] * psi;
      Su += wi * abs_pow(v[i], q);
      Sv += wi * abs_pow(ut[i], p);
      if (options.kernels) {
        if (ut[i] != 0.0) cu += wi * ut[i] * k1->eta(t, t, record.radii[i], tab1[i]);
        if (v[i] != 0.0) cv += wi * v[i] * k2->eta(t, t, record.radii[i], tab2[i]);
      }
    }
    s.U.push_back(U);
    s.Uprime.push_back(Up);
    s.V.push_back(V);
    s.Vprime.push_back(Vp);
    s.U1.push_back(U1);
    s.V1.push_back(V1);
    s.U2.push_back(U2);
    s.source_u.push_back(Su);
    s.source_v.push_back(Sv);
    if (options.kernels) {
      s.curlyU.push_back(cu);
      s.curlyV.push_back(cv);
    }
  }
  return s;
}

InitialDataIntegrals data_integrals(const ProblemSpec& spec) {
  const int n = spec.n;
  const double base = bump_integral(spec, [n](double rho) { return phi(n, rho); });
  const double m1 = multiplier(spec.b1, 0.0);
  const double m2 = multiplier(spec.b2, 0.0);
  InitialDataIntegrals I;
  I.I1_u0 = 0.5 * m1 * spec.data.a_u0 * base;
  I.I1_u1 = 0.5 * m1 * spec.data.a_u1 * base;
  I.I2_v0 = 0.5 * m2 * spec.data.a_v0 * base;
  I.I2_v1 = 0.5 * m2 * spec.data.a_v1 * base;
  return I;
}

std::vector<BoundCheck> check_floor_bounds(const FunctionalSeries& series, const InitialDataIntegrals& integrals,
                                           double eps, double slack) {
  auto floor_check = [&](BoundId id, const std::vector<double>& y, double floor) {
    BoundCheck c;
    c.bound_id = id;
    c.reference = std::abs(floor);
    c.min_margin = std::numeric_limits<double>::infinity();
    for (double value : y) c.min_margin = std::min(c.min_margin, value - floor);
    if (y.empty()) c.min_margin = 0.0;
    if (!series.times.empty()) {
      c.t_lo = series.times.front();
      c.t_hi = series.times.back();
    }
    c.pass = c.min_margin >= -slack * c.reference;
    return c;
  };
  return {floor_check(BoundId::U1Floor, series.U1, eps * integrals.I1_u0),
          floor_check(BoundId::V1Floor, series.V1, eps * integrals.I2_v0),
          floor_check(BoundId::U2Floor, series.U2, eps * integrals.I1_u1)};
}

std::vector<BoundCheck> check_nonlinearity_bounds(const SolutionRecord& record, const ProblemSpec& spec,
                                                  double slack) {
  ExtractOptions plain;
  plain.kernels = false;
  const FunctionalSeries s = extract(record, spec, 0.0, 0.0, plain);
  const double n = spec.n;
  const double eq = n - 1.0 - 0.5 * (n - 1.0) * spec.pq.q();
  const double ep = n - 1.0 - 0.5 * (n - 1.0) * spec.pq.p();
  const double end = record.t_blowup ? *record.t_blowup : std::numeric_limits<double>::infinity();
  return {envelope(BoundId::NonlinQ, s.times, s.source_u, 1.0, end,
                   [eq](double t) { return std::pow(1.0 + t, eq); }, slack),
          envelope(BoundId::NonlinP, s.times, s.source_v, 1.0, end,
                   [ep](double t) { return std::pow(1.0 + t, ep); }, slack)};
}

IdentityResiduals check_fundamental_identity(const SolutionRecord& record, const ProblemSpec& spec, double r1,
                                             double r2, int checkpoints, const ExtractOptions& options) {
  if (!spec.b1.is_zero() || !spec.b2.is_zero()) {
    throw std::invalid_argument("the integral identities hold for the undamped system only");
  }
  if (checkpoints < 1) throw std::invalid_argument("need at least one checkpoint");
  check_record(record, spec);
  ExtractOptions opts = options;
  opts.kernels = true;
  const FunctionalSeries s = extract(record, spec, r1, r2, opts);

  const int n = spec.n;
  const double p = spec.pq.p();
  const double q = spec.pq.q();
  const std::size_t count = record.radii.size();
  const std::size_t last = support_end(record);
  const auto w = radial_weights(n, record.dr, count);
  const KernelEvaluator k1 = make_kernel(spec, r1, opts);
  const KernelEvaluator k2 = make_kernel(spec, r2, opts);
  const auto tab1 = phi_tables(k1, record.radii, last);
  const auto tab2 = phi_tables(k2, record.radii, last);
  const auto& rule1 = k1.rule();
  const auto& rule2 = k2.rule();
  const std::size_t m1 = rule1.size();
  const std::size_t m2 = rule2.size();

  // G_k(s) = ∫ source(s,x) e^{-λ_k(R+s)} Φ(λ_k x) dx per sample and node.
  const std::size_t samples = record.times.size();
  std::vector<std::vector<double>> G1(samples, std::vector<double>(m1, 0.0));
  std::vector<std::vector<double>> G2(samples, std::vector<double>(m2, 0.0));
  for (std::size_t j = 0; j < samples; ++j) {
    const double sj = record.times[j];
    for (std::size_t i = 0; i < last; ++i) {
      const double rho = record.radii[i];
      const double a = w[i] * abs_pow(record.v[j][i], q);
      const double b = w[i] * abs_pow(record.ut[j][i], p);
      if (a != 0.0) {
        for (std::size_t k = 0; k < m1; ++k) {
          const double lam = rule1.nodes[k];
          G1[j][k] += a * std::exp(lam * (rho - spec.R - sj)) * tab1[i][k];
        }
      }
      if (b != 0.0) {
        for (std::size_t k = 0; k < m2; ++k) {
          const double lam = rule2.nodes[k];
          G2[j][k] += b * std::exp(lam * (rho - spec.R - sj)) * tab2[i][k];
        }
      }
    }
  }

  const double eps = spec.eps;
  const auto& d = spec.data;
  IdentityResiduals out;
  for (int c = 0; c < checkpoints; ++c) {
    const std::size_t j = checkpoints == 1 ? samples - 1 : c * (samples - 1) / (checkpoints - 1);
    const double t = record.times[j];
    out.checkpoints.push_back(t);

    const double data_u = eps * t * d.a_u0 * bump_integral(spec, [&](double rho) {
                            return k1.eta(t, 0.0, rho, k1.phi_table(rho), 2);
                          }) +
                          eps * d.a_u1 * bump_integral(spec, [&](double rho) {
                            return k1.xi(t, 0.0, rho, k1.phi_table(rho));
                          });
    const double data_v = eps * d.a_v0 * bump_integral(spec, [&](double rho) {
                            return k2.xi(t, 0.0, rho, k2.phi_table(rho));
                          }) +
                          eps * t * d.a_v1 * bump_integral(spec, [&](double rho) {
                            return k2.eta(t, 0.0, rho, k2.phi_table(rho));
                          });

    // Trapezoid in s over the samples in [0, t].
    std::vector<double> fu(j + 1), fv(j + 1);
    for (std::size_t l = 0; l <= j; ++l) {
      const double lag = t - record.times[l];
      double a = 0.0, b = 0.0;
      for (std::size_t k = 0; k < m1; ++k) {
        const double lam = rule1.nodes[k];
        a += rule1.weights[k] * 0.5 * (1.0 + std::exp(-2.0 * lam * lag)) * G1[l][k];
      }
      for (std::size_t k = 0; k < m2; ++k) {
        const double lam = rule2.nodes[k];
        b += rule2.weights[k] * std::exp(-lam * lag) * sinhc(lam * lag) * G2[l][k];
      }
      fu[l] = a;
      fv[l] = lag * b;
    }
    const std::vector<double> ts(record.times.begin(), record.times.begin() + static_cast<long>(j) + 1);
    const double rhs_u = data_u + (j > 0 ? trapezoid(ts, fu) : 0.0);
    const double rhs_v = data_v + (j > 0 ? trapezoid(ts, fv) : 0.0);

    auto rel = [](double lhs, double rhs) {
      const double scale = std::max(std::abs(lhs), std::abs(rhs));
      return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
    };
    out.curlyU = std::max(out.curlyU, rel(s.curlyU[j], rhs_u));
    out.curlyV = std::max(out.curlyV, rel(s.curlyV[j], rhs_v));
  }
  return out;
}

std::vector<BoundCheck> check_log_seeds(const FunctionalSeries& series, const ProblemSpec& spec, double eps,
                                        double slack) {
  (void)eps;
  const Region region = classify(spec.n, spec.pq).region;
  if (region != Region::CriticalTheta1 && region != Region::CriticalTheta2 && region != Region::DoubleCritical) {
    throw std::invalid_argument("log seeds apply to critical exponent pairs only");
  }
  if (!spec.b1.is_zero() || !spec.b2.is_zero()) throw std::invalid_argument("log seeds need zero damping");
  if (series.curlyU.size() != series.size()) throw std::invalid_argument("series lacks kernel functionals");
  const double e = std::exp(1.0);
  const double end = std::numeric_limits<double>::infinity();
  std::vector<BoundCheck> checks;
  if (region != Region::CriticalTheta2) {
    checks.push_back(envelope(BoundId::CurlyULog, series.times, series.curlyU, e, end,
                              [](double t) { return std::log(t); }, slack));
  }
  if (region != Region::CriticalTheta1) {
    checks.push_back(envelope(BoundId::CurlyVLog, series.times, series.curlyV, e, end,
                              [](double t) { return std::log(2.0 * t / 3.0); }, slack));
  }
  return checks;
}

BoundCheck check_uprime_floor(const FunctionalSeries& series, const ProblemSpec& spec, double slack) {
  BoundCheck c;
  c.bound_id = BoundId::UprimeFloor;
  if (series.size() == 0) {
    c.pass = true;
    return c;
  }
  const double floor = multiplier(spec.b1, 0.0) * series.Uprime.front();
  c.reference = std::abs(floor);
  c.t_lo = series.times.front();
  c.t_hi = series.times.back();
  c.min_margin = std::numeric_limits<double>::infinity();
  for (double value : series.Uprime) c.min_margin = std::min(c.min_margin, value - floor);
  c.pass = c.min_margin >= -slack * c.reference;
  return c;
}

double ode_residual(const FunctionalSeries& series, const ProblemSpec& spec, double t_hi) {
  double worst = 0.0;
  const auto& t = series.times;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    if (!(h0 > 0.0) || !(h1 > 0.0) || t[i + 1] > t_hi) continue;
    // Second-order derivative on a non-uniform stencil.
    const double upp = (-h1 / (h0 * (h0 + h1))) * series.Uprime[i - 1] + ((h1 - h0) / (h0 * h1)) * series.Uprime[i] +
                       (h0 / (h1 * (h0 + h1))) * series.Uprime[i + 1];
    const double damp = spec.b1.b(t[i]) * series.Uprime[i];
    const double src = series.source_u[i];
    const double scale = std::max({std::abs(upp), std::abs(damp), std::abs(src)});
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(upp + damp - src) / scale);
  }
  return worst;
}

double derivative_residual(const FunctionalSeries& series, double t_hi) {
  double worst = 0.0;
  const auto& t = series.times;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    if (!(h0 > 0.0) || !(h1 > 0.0) || t[i + 1] > t_hi) continue;
    const double d = (-h1 / (h0 * (h0 + h1))) * series.U[i - 1] + ((h1 - h0) / (h0 * h1)) * series.U[i] +
                     (h0 / (h1 * (h0 + h1))) * series.U[i + 1];
    const double scale = std::max(std::abs(d), std::abs(series.Uprime[i]));
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(d - series.Uprime[i]) / scale);
  }
  return worst;
}

void write_series_csv(std::ostream& out, const FunctionalSeries& series) {
  out << "t,U,Uprime,V,Vprime,U1,V1,U2,curlyU,curlyV\n";
  const bool kernels = series.curlyU.size() == series.size();
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << series.times[i] << ',' << series.U[i] << ',' << series.Uprime[i] << ',' << series.V[i] << ','
        << series.Vprime[i] << ',' << series.U1[i] << ',' << series.V1[i] << ',' << series.U2[i] << ',';
    if (kernels) out << series.curlyU[i] << ',' << series.curlyV[i];
    else out << ',';
    out << '\n';
  }
}

void write_checks_json(std::ostream& out, const std::vector<BoundCheck>& checks) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json item;
    item["bound_id"] = std::string(to_string(c.bound_id));
    item["min_margin"] = c.min_margin;
    item["window"] = {c.t_lo, c.t_hi};
    item["pass"] = c.pass;
    doc.push_back(item);
  }
  out << doc.dump(2) << '\n';
}

bool all_passed(const std::vector<BoundCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

}  // namespace mixedwave
