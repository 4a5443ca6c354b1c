#include "mixedwave/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mixedwave {

ExponentPair::ExponentPair(double p, double q) : p_(p), q_(q) {
  if (!(p > 1.0) || !(q > 1.0)) {
    throw std::invalid_argument("exponents must satisfy p > 1 and q > 1 (got p=" +
                                std::to_string(p) + ", q=" + std::to_string(q) + ")");
  }
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::Subcritical: return "Subcritical";
    case Region::CriticalTheta1: return "CriticalTheta1";
    case Region::CriticalTheta2: return "CriticalTheta2";
    case Region::DoubleCritical: return "DoubleCritical";
    case Region::Supercritical: return "Supercritical";
  }
  return "Unknown";
}

std::string_view to_string(LifespanKind kind) {
  switch (kind) {
    case LifespanKind::PowerLaw: return "PowerLaw";
    case LifespanKind::ExpTheta1: return "ExpTheta1";
    case LifespanKind::ExpTheta2: return "ExpTheta2";
    case LifespanKind::ExpDouble: return "ExpDouble";
    case LifespanKind::None: return "None";
  }
  return "Unknown";
}

void require_dimension(int n, int minimum) {
  if (n < minimum) {
    throw std::invalid_argument("spatial dimension must be >= " + std::to_string(minimum) +
                                " (got " + std::to_string(n) + ")");
  }
}

double theta1(int n, const ExponentPair& pq) {
  require_dimension(n);
  const double p = pq.p();
  const double q = pq.q();
  return (q + 1.0 + 1.0 / p) / (p * q - 1.0) - 0.5 * (n - 1);
}

double theta2(int n, const ExponentPair& pq) {
  require_dimension(n);
  const double p = pq.p();
  const double q = pq.q();
  return (2.0 + 1.0 / q) / (p * q - 1.0) - 0.5 * (n - 1);
}

CriticalData classify(int n, const ExponentPair& pq, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("classification tolerance must be >= 0");
  CriticalData data;
  data.n = n;
  data.theta1 = theta1(n, pq);
  data.theta2 = theta2(n, pq);

  const bool zero1 = std::abs(data.theta1) <= tol;
  const bool zero2 = std::abs(data.theta2) <= tol;
  if (zero1 && zero2) {
    data.region = Region::DoubleCritical;
  } else if (data.theta1 > tol || data.theta2 > tol) {
    data.region = Region::Subcritical;
  } else if (zero1) {
    data.region = Region::CriticalTheta1;
  } else if (zero2) {
    data.region = Region::CriticalTheta2;
  } else {
    data.region = Region::Supercritical;
  }
  return data;
}

bool CuspPoint::ordered() const {
  return q_mix < p_glassey && p_glassey < p_strauss && p_strauss < p_mix;
}

double strauss_exponent(int n) {
  require_dimension(n, 2);
  const double m = n;
  return (m + 1.0 + std::sqrt(m * m + 10.0 * m - 7.0)) / (2.0 * (m - 1.0));
}

double glassey_exponent(int n) {
  require_dimension(n, 2);
  return (n + 1.0) / (n - 1.0);
}

CuspPoint cusp_exponents(int n) {
  require_dimension(n, 2);
  const double m = n;
  CuspPoint cusp;
  cusp.q_mix = 0.5 * (1.0 + std::sqrt((m + 9.0) / (m + 1.0)));
  cusp.p_mix = (m + 1.0 + std::sqrt((m + 9.0) * (m + 1.0))) / (2.0 * (m - 1.0));
  cusp.p_strauss = strauss_exponent(n);
  cusp.p_glassey = glassey_exponent(n);
  return cusp;
}

double cusp_cubic(int n, double q) {
  const double m = n;
  return (m + 1.0) * q * q * q - 0.5 * (m + 1.0) * q * q - 0.5 * (m + 5.0) * q - 1.0;
}

double cusp_p_from_q(double q) {
  const double denominator = 1.0 + 1.0 / q - q;
  if (!(q > 1.0) || !(denominator > 0.0)) {
    throw std::invalid_argument("cusp relation needs 1 < q < (1+sqrt(5))/2");
  }
  return 1.0 / denominator;
}

CuspResiduals cusp_residuals(int n) {
  const CuspPoint cusp = cusp_exponents(n);
  const ExponentPair pq = cusp.pair();
  return {cusp_cubic(n, cusp.q_mix), theta1(n, pq), theta2(n, pq)};
}

LifespanPrediction lifespan_prediction(int n, const ExponentPair& pq, double tol) {
  const CriticalData data = classify(n, pq, tol);
  const double p = pq.p();
  const double q = pq.q();
  const double gap = pq.product() - 1.0;
  switch (data.region) {
    case Region::Subcritical:
      return {LifespanKind::PowerLaw, -1.0 / data.max_theta()};
    case Region::CriticalTheta1:
      return {LifespanKind::ExpTheta1, -p * gap};
    case Region::CriticalTheta2:
      return {LifespanKind::ExpTheta2, -q * gap};
    case Region::DoubleCritical:
      return {LifespanKind::ExpDouble, -q * gap / (q + 1.0)};
    case Region::Supercritical:
      break;
  }
  return {LifespanKind::None, 0.0};
}

}  // namespace mixedwave
