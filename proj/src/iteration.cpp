#include "mixedwave/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mixedwave {

namespace {

const double kLn2 = std::numbers::ln2;

void check_j_max(int j_max, double pq_product) {
  if (j_max < 0 || j_max > kMaxIterations) {
    throw std::invalid_argument("j_max must lie in [0, " + std::to_string(kMaxIterations) + "]");
  }
  if (j_max * std::log(pq_product) > 700.0) {
    throw std::invalid_argument("(pq)^j_max exceeds the double range; lower j_max");
  }
}

SequenceTable make_table(SequenceFamily family, int n, const ExponentPair& pq, double eps) {
  SequenceTable table;
  table.family = family;
  table.n = n;
  table.p = pq.p();
  table.q = pq.q();
  table.eps = eps;
  return table;
}

// Brute recursion L_{j+1} = pq L_j + c_j alongside the unrolled sum
// L_j = (pq)^j L_0 + Σ_{k<j} (pq)^{j-1-k} c_k.
template <class Increment>
void fill_coefficients(SequenceTable& table, double x, double log_c0, Increment&& increment) {
  const std::size_t count = table.t_power.size();
  table.coeff_log.assign(count, 0.0);
  table.coeff_log_closed.assign(count, 0.0);
  std::vector<double> c(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) c[k] = increment(static_cast<int>(k), table.t_power_closed[k]);

  double brute = log_c0;
  for (std::size_t j = 0; j < count; ++j) {
    table.coeff_log[j] = brute;
    double closed = std::pow(x, static_cast<double>(j)) * log_c0;
    for (std::size_t k = 0; k < j; ++k) closed += std::pow(x, static_cast<double>(j - 1 - k)) * c[k];
    table.coeff_log_closed[j] = closed;
    // Recursion consumes the recursively generated power, not the closed form.
    brute = x * brute + increment(static_cast<int>(j), table.t_power[j]);
  }
}

double log_or_throw(double value, const char* what) {
  if (!(value > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
  return std::log(value);
}

}  // namespace

std::string_view to_string(SequenceFamily family) {
  switch (family) {
    case SequenceFamily::SubcriticalC: return "subcritical-C";
    case SequenceFamily::SubcriticalK: return "subcritical-K";
    case SequenceFamily::Theta1: return "theta1";
    case SequenceFamily::Theta2: return "theta2";
    case SequenceFamily::Double: return "double";
  }
  return "unknown";
}

std::string_view to_string(CriticalCase c) {
  switch (c) {
    case CriticalCase::Theta1: return "theta1";
    case CriticalCase::Theta2: return "theta2";
    case CriticalCase::Double: return "double";
  }
  return "unknown";
}

CriticalCase critical_case_from_string(std::string_view name) {
  if (name == "theta1") return CriticalCase::Theta1;
  if (name == "theta2") return CriticalCase::Theta2;
  if (name == "double") return CriticalCase::Double;
  throw std::invalid_argument("unknown critical case '" + std::string(name) +
                              "' (expected theta1, theta2 or double)");
}

void FrameConstants::validate() const {
  for (double value : {C, K, Ctilde, Ktilde}) {
    if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("frame constants must be positive");
  }
  for (double m : {m1_0, m2_0}) {
    if (!(m > 0.0) || m > 1.0) throw std::invalid_argument("multiplier values must lie in (0, 1]");
  }
}

IterationConstants derive_constants(int n, const ExponentPair& pq, const FrameConstants& frame) {
  require_dimension(n);
  frame.validate();
  const double p = pq.p();
  const double q = pq.q();
  const double x = pq.product();
  const double gap = x - 1.0;
  const double C = frame.C, K = frame.K;

  IterationConstants out;
  out.frame = frame;
  out.S = x / (gap * gap);

  out.M = C * std::pow(K, p) * std::pow(n + 1.0 + (p + 2.0) / gap, -(p + 2.0));
  out.N = frame.m2_0 * frame.Ktilde / (n * (n + 1.0)) *
          std::exp(-out.S * (p + 2.0) * std::log(x)) * std::pow(out.M, 1.0 / gap);
  out.Mtilde = K * std::pow(C, q) * std::pow(n + (2.0 * q + 1.0) / gap, -(2.0 * q + 1.0));
  out.Ntilde = frame.m1_0 * frame.Ctilde / n *
               std::exp(-out.S * (2.0 * q + 1.0) * std::log(x)) * std::pow(out.Mtilde, 1.0 / gap);

  out.Mcrit = std::exp2(-q * (3.0 * n + 4.0)) * C * std::pow(K, q) * gap / x;
  out.Ncrit = std::exp2(2.0 * q) * x;
  out.E = std::exp2(-q * (2.0 * p - 1.0) / gap) * frame.Ctilde * std::pow(out.Ncrit, -out.S) *
          std::pow(out.Mcrit, gap);

  out.M1 = std::exp2(-3.0 * n * p - 6.0) * K * std::pow(C, p) * gap / x;
  out.N1 = std::exp2(2.0 * (p + 1.0)) * x;
  out.E1 = std::exp2(-p * (2.0 * q - 1.0) / gap) * frame.Ktilde * std::pow(out.N1, -out.S) *
           std::pow(out.M1, gap);

  out.M2 = std::exp2(-5.0 * q - 2.0) * C * std::pow(K, q) * std::pow(gap / (q * (p + 1.0)), q + 1.0);
  out.N2 = std::exp2(q) * std::pow(x, q + 1.0);
  out.E2 = std::exp2(-2.0 - (q + 1.0) / gap) * frame.Ctilde * std::pow(out.N2, -out.S) *
           std::pow(out.M2, gap);
  return out;
}

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

double SequenceTable::max_relative_gap() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    worst = std::max({worst, relative_gap(coeff_log[i], coeff_log_closed[i]),
                      relative_gap(t_power[i], t_power_closed[i]),
                      relative_gap(weight_power[i], weight_power_closed[i])});
  }
  return worst;
}

SubcriticalTables subcritical_sequences(int n, const ExponentPair& pq, int j_max, double eps,
                                        const FrameConstants& frame) {
  require_dimension(n);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double x = pq.product();
  check_j_max(j_max, x);
  const double p = pq.p();
  const double q = pq.q();
  const double gap = x - 1.0;
  const IterationConstants consts = derive_constants(n, pq, frame);
  const int count = j_max + 1;

  SubcriticalTables out{make_table(SequenceFamily::SubcriticalC, n, pq, eps),
                        make_table(SequenceFamily::SubcriticalK, n, pq, eps)};
  SequenceTable& c_tab = out.C;
  SequenceTable& k_tab = out.K;

  double a = n + 1.0, b = 0.5 * (n - 1) * p;
  double alpha = n, beta = 0.5 * (n - 1) * q;
  for (int j = 0; j < count; ++j) {
    const double xj = std::pow(x, j);
    c_tab.j.push_back(j);
    c_tab.t_power.push_back(a);
    c_tab.weight_power.push_back(b);
    c_tab.t_power_closed.push_back((n + 1.0 + (p + 2.0) / gap) * xj - (p + 2.0) / gap);
    c_tab.weight_power_closed.push_back((0.5 * (n - 1) * p + n) * xj - n);
    k_tab.j.push_back(j);
    k_tab.t_power.push_back(alpha);
    k_tab.weight_power.push_back(beta);
    k_tab.t_power_closed.push_back((n + (2.0 * q + 1.0) / gap) * xj - (2.0 * q + 1.0) / gap);
    k_tab.weight_power_closed.push_back((0.5 * (n - 1) * q + n) * xj - n);

    a = x * a + p + 2.0;
    b = x * b + n * gap;
    alpha = x * alpha + 2.0 * q + 1.0;
    beta = x * beta + n * gap;
  }

  const double log_C = std::log(frame.C), log_K = std::log(frame.K);
  const double log_c0 = std::log(frame.m2_0 * frame.Ktilde / (n * (n + 1.0))) + p * std::log(eps);
  const double log_k0 = std::log(frame.m1_0 * frame.Ctilde / n) + q * std::log(eps);

  fill_coefficients(c_tab, x, log_c0, [&](int, double aj) {
    return log_C + p * log_K - p * std::log(aj * q + 1.0) - std::log(aj * x + p + 1.0) -
           std::log(aj * x + p + 2.0);
  });
  fill_coefficients(k_tab, x, log_k0, [&](int, double alj) {
    return log_K + q * log_C - q * std::log(alj * p + 1.0) - q * std::log(alj * p + 2.0) -
           std::log(alj * x + 2.0 * q + 1.0);
  });

  // log C_j >= (pq)^j (log C_0 - S log L + log M/(pq-1)) + (j+1) log L/(pq-1)
  //            + log L/(pq-1)^2 - log M/(pq-1),  with L = (pq)^{p+2}.
  auto lower = [&](SequenceTable& tab, double log_seed, double log_L, double log_M) {
    tab.coeff_log_lower.clear();
    for (int j = 0; j < count; ++j) {
      tab.coeff_log_lower.push_back(std::pow(x, j) * (log_seed - consts.S * log_L + log_M / gap) +
                                    (j + 1.0) * log_L / gap + log_L / (gap * gap) - log_M / gap);
    }
  };
  lower(c_tab, log_c0, (p + 2.0) * std::log(x), std::log(consts.M));
  lower(k_tab, log_k0, (2.0 * q + 1.0) * std::log(x), std::log(consts.Mtilde));
  return out;
}

double critical_curve_p(CriticalCase c, int n, double q) {
  require_dimension(n, 2);
  const double h = 0.5 * (n - 1);
  double p = 0.0;
  switch (c) {
    case CriticalCase::Theta1: {
      // (q + 1 + 1/p) = h (pq - 1)  <=>  h q p^2 - (h + q + 1) p - 1 = 0
      const double A = h * q;
      const double B = h + q + 1.0;
      p = (B + std::sqrt(B * B + 4.0 * A)) / (2.0 * A);
      break;
    }
    case CriticalCase::Theta2:
      p = ((2.0 + 1.0 / q) / h + 1.0) / q;
      break;
    case CriticalCase::Double:
      return cusp_exponents(n).p_mix;
  }
  if (!(p > 1.0)) throw std::invalid_argument("critical branch has no admissible p > 1 for this q");
  return p;
}

SequenceTable critical_sequences(CriticalCase c, int n, const ExponentPair& pq, int j_max,
                                 double eps, const FrameConstants& frame, double tol) {
  require_dimension(n, 2);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double x = pq.product();
  check_j_max(j_max, x);
  const CriticalData data = classify(n, pq, tol);
  const bool on1 = std::abs(data.theta1) <= tol && data.theta2 <= tol;
  const bool on2 = std::abs(data.theta2) <= tol && data.theta1 <= tol;
  const bool ok = (c == CriticalCase::Theta1 && on1) || (c == CriticalCase::Theta2 && on2) ||
                  (c == CriticalCase::Double && data.region == Region::DoubleCritical);
  if (!ok) {
    throw std::invalid_argument("(p,q) is not on the " + std::string(to_string(c)) +
                                " critical branch (region " + std::string(to_string(data.region)) + ")");
  }

  const double p = pq.p();
  const double q = pq.q();
  const double gap = x - 1.0;
  const IterationConstants consts = derive_constants(n, pq, frame);
  const double log_C = std::log(frame.C), log_K = std::log(frame.K);
  const int count = j_max + 1;

  SequenceFamily family = SequenceFamily::Theta1;
  double t_step = 1.0, w_step = 0.0, log_seed = 0.0, log_M = 0.0, log_N = 0.0;
  switch (c) {
    case CriticalCase::Theta1:
      family = SequenceFamily::Theta1;
      t_step = 1.0;
      w_step = q * (p - 1.0);
      log_seed = std::log(frame.Ctilde) + x * std::log(eps);
      log_M = std::log(consts.Mcrit);
      log_N = std::log(consts.Ncrit);
      break;
    case CriticalCase::Theta2:
      family = SequenceFamily::Theta2;
      t_step = 1.0;
      w_step = p * (q - 1.0);
      log_seed = std::log(frame.Ktilde) + x * std::log(eps);
      log_M = std::log(consts.M1);
      log_N = std::log(consts.N1);
      break;
    case CriticalCase::Double:
      family = SequenceFamily::Double;
      t_step = q + 1.0;
      w_step = gap;
      log_seed = std::log(frame.Ctilde) + q * std::log(eps);
      log_M = std::log(consts.M2);
      log_N = std::log(consts.N2);
      break;
  }

  SequenceTable table = make_table(family, n, pq, eps);
  double t_pow = 1.0, w_pow = 0.0;
  const SeriesS partial = series_S(x, std::max(j_max, 1));
  for (int j = 0; j < count; ++j) {
    const double xj = std::pow(x, j);
    table.j.push_back(j);
    table.t_power.push_back(t_pow);
    table.weight_power.push_back(w_pow);
    table.ell.push_back(2.0 - std::exp2(-j));
    switch (c) {
      case CriticalCase::Theta1:
      case CriticalCase::Theta2:
        table.t_power_closed.push_back((xj * x - 1.0) / gap);
        table.weight_power_closed.push_back(w_step / gap * (xj - 1.0));
        break;
      case CriticalCase::Double:
        table.t_power_closed.push_back((1.0 + (q + 1.0) / gap) * xj - (q + 1.0) / gap);
        table.weight_power_closed.push_back(xj - 1.0);
        break;
    }
    const double s_j = j == 0 ? 0.0 : partial.partial[j - 1];
    table.coeff_log_lower.push_back(xj * (log_seed - s_j * log_N + log_M / gap) - log_M / gap);
    t_pow = x * t_pow + t_step;
    w_pow = x * w_pow + w_step;
  }

  fill_coefficients(table, x, log_seed, [&](int j, double tj) {
    switch (c) {
      case CriticalCase::Theta1:
        return -(2.0 * q * j + 3.0 * q * (n + 2.0)) * kLn2 + log_C + q * log_K - std::log(tj * x + 1.0);
      case CriticalCase::Theta2:
        return -(2.0 * (p + 1.0) * j + (3.0 * n + 2.0) * p + 8.0) * kLn2 + log_K + p * log_C -
               std::log(tj * x + 1.0);
      case CriticalCase::Double:
        break;
    }
    return -((j + 6.0) * q + 2.0) * kLn2 + log_C + q * log_K - q * std::log(tj * p + 1.0) -
           std::log(tj * x + q + 1.0);
  });
  return table;
}

GeometricSums geometric_sums(double x, int j) {
  if (!(x > 1.0)) throw std::invalid_argument("geometric_sums needs x > 1");
  if (j < 1) throw std::invalid_argument("geometric_sums needs j >= 1");
  GeometricSums out;
  for (int k = 0; k < j; ++k) {
    const double xk = std::pow(x, k);
    out.first_direct += xk;
    out.second_direct += (j - k) * xk;
  }
  out.first_closed = (std::pow(x, j) - 1.0) / (x - 1.0);
  out.second_closed = ((std::pow(x, j + 1) - 1.0) / (x - 1.0) - (j + 1.0)) / (x - 1.0);
  return out;
}

SeriesS series_S(double pq_product, int j_max) {
  if (!(pq_product > 1.0)) throw std::invalid_argument("series_S needs pq > 1");
  if (j_max < 1) throw std::invalid_argument("series_S needs j_max >= 1");
  SeriesS out;
  const double x = 1.0 / pq_product;
  double sum = 0.0;
  double xk = 1.0;
  for (int k = 1; k <= j_max; ++k) {
    xk *= x;
    sum += k * xk;
    out.partial.push_back(sum);
  }
  out.limit = x / ((1.0 - x) * (1.0 - x));
  return out;
}

double ThresholdTime::T() const { return std::exp(log_T); }

ThresholdTime threshold_time(int n, const ExponentPair& pq, double eps,
                             const IterationConstants& consts, double tol) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const CriticalData data = classify(n, pq, tol);
  const double p = pq.p();
  const double q = pq.q();
  const double gap = pq.product() - 1.0;
  const double log_eps = std::log(eps);

  ThresholdTime out;
  out.kind = lifespan_prediction(n, pq, tol).kind;
  switch (data.region) {
    case Region::Subcritical: {
      if (data.theta1 >= data.theta2) {
        const double th = data.theta1;
        out.formula_id = "subcritical-theta1";
        out.log_T = (0.5 * (n - 1) + n / p) / th * kLn2 -
                    log_or_throw(consts.N, "N") / (p * th) - log_eps / th;
      } else {
        const double th = data.theta2;
        out.formula_id = "subcritical-theta2";
        out.log_T = (0.5 * (n - 1) + n / q) / th * kLn2 -
                    log_or_throw(consts.Ntilde, "Ntilde") / (q * th) - log_eps / th;
      }
      out.log_log_T = out.log_T > 0.0 ? std::log(out.log_T) : std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    case Region::CriticalTheta1:
      out.formula_id = "critical-theta1";
      out.log_log_T = -gap / q * log_or_throw(consts.E, "E") - p * gap * log_eps;
      break;
    case Region::CriticalTheta2:
      out.formula_id = "critical-theta2";
      out.log_log_T = -gap / p * log_or_throw(consts.E1, "E1") - q * gap * log_eps;
      break;
    case Region::DoubleCritical:
      out.formula_id = "critical-double";
      out.log_log_T = -gap / (q + 1.0) * log_or_throw(consts.E2, "E2") - q * gap / (q + 1.0) * log_eps;
      break;
    case Region::Supercritical:
      throw std::invalid_argument("no threshold time in the supercritical region");
  }
  out.log_T = std::exp(out.log_log_T);
  return out;
}

double divergence_driver(std::string_view formula_id, int n, const ExponentPair& pq, double eps,
                         double log_t, const IterationConstants& consts) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double p = pq.p();
  const double q = pq.q();
  const double gap = pq.product() - 1.0;
  const double log_eps = std::log(eps);
  double log_driver = 0.0;
  if (formula_id == "subcritical-theta1") {
    log_driver = p * log_eps - (0.5 * (n - 1) * p + n) * kLn2 + std::log(consts.N) +
                 p * theta1(n, pq) * log_t;
  } else if (formula_id == "subcritical-theta2") {
    log_driver = q * log_eps - (0.5 * (n - 1) * q + n) * kLn2 + std::log(consts.Ntilde) +
                 q * theta2(n, pq) * log_t;
  } else {
    if (!(log_t > 0.0)) return 0.0;  // (log t)^γ vanishes for t <= 1
    const double ll = std::log(log_t);
    if (formula_id == "critical-theta1") {
      log_driver = std::log(consts.E) + pq.product() * log_eps + q / gap * ll;
    } else if (formula_id == "critical-theta2") {
      log_driver = std::log(consts.E1) + pq.product() * log_eps + p / gap * ll;
    } else if (formula_id == "critical-double") {
      log_driver = std::log(consts.E2) + q * log_eps + (q + 1.0) / gap * ll;
    } else {
      throw std::invalid_argument("unknown driver '" + std::string(formula_id) + "'");
    }
  }
  return std::exp(log_driver);
}

bool divergence_certificate(const SequenceTable& table, double eps, double t,
                            const IterationConstants& consts) {
  if (!(t > 0.0)) throw std::invalid_argument("certificate needs t > 0");
  const ExponentPair pq(table.p, table.q);
  std::string_view id;
  switch (table.family) {
    case SequenceFamily::SubcriticalC: id = "subcritical-theta1"; break;
    case SequenceFamily::SubcriticalK: id = "subcritical-theta2"; break;
    case SequenceFamily::Theta1: id = "critical-theta1"; break;
    case SequenceFamily::Theta2: id = "critical-theta2"; break;
    case SequenceFamily::Double: id = "critical-double"; break;
  }
  return divergence_driver(id, table.n, pq, eps, std::log(t), consts) > 1.0;
}

KernelParameters r_parameters(CriticalCase c, int n, const ExponentPair& pq, double offset, double tol) {
  require_dimension(n, 2);
  if (!(offset > 0.0)) throw std::invalid_argument("kernel offset must be positive");
  const CriticalData data = classify(n, pq, tol);
  const double h = 0.5 * (n - 1);
  const double base1 = h - 1.0 / pq.p();
  const double base2 = h - 1.0 / pq.q();
  KernelParameters out;
  out.identity_residual1 = std::abs(base1 - (n - 1.0 - h * pq.q()));
  out.identity_residual2 = std::abs(base2 - (n - h * pq.p()));
  switch (c) {
    case CriticalCase::Theta1:
      if (std::abs(data.theta1) > tol) throw std::invalid_argument("(p,q) is off the Θ1 = 0 curve");
      out.r1 = base1;
      out.r2 = base2 + offset;
      break;
    case CriticalCase::Theta2:
      if (std::abs(data.theta2) > tol) throw std::invalid_argument("(p,q) is off the Θ2 = 0 curve");
      out.r2 = base2;
      out.r1 = base1 + offset;
      break;
    case CriticalCase::Double: {
      if (data.region != Region::DoubleCritical) throw std::invalid_argument("(p,q) is not the cusp point");
      // The identities are exact at the cusp; near-cusp inputs accepted by tol move
      // them by O(|Θ|).
      const double allowed = std::max(1e-12, 100.0 * std::max(std::abs(data.theta1), std::abs(data.theta2)));
      if (out.identity_residual1 > allowed || out.identity_residual2 > allowed) {
        throw std::invalid_argument("cusp identities for r1, r2 fail");
      }
      out.r1 = base1;
      out.r2 = base2;
      break;
    }
  }
  return out;
}

void write_csv(std::ostream& out, const SequenceTable& table) {
  out << "j,coeff_log,coeff_log_closed,t_power,t_power_closed,weight_power,weight_power_closed,ell_j\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.j[i] << ',' << table.coeff_log[i] << ',' << table.coeff_log_closed[i] << ','
        << table.t_power[i] << ',' << table.t_power_closed[i] << ',' << table.weight_power[i] << ','
        << table.weight_power_closed[i] << ',';
    if (i < table.ell.size()) out << table.ell[i];
    out << '\n';
  }
}

}  // namespace mixedwave
