#ifndef MIXEDWAVE_QUADRATURE_HPP
#define MIXEDWAVE_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace mixedwave {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta, built by
/// Golub-Welsch. alpha, beta > -1.
QuadratureRule gauss_jacobi(int count, double alpha, double beta);

/// Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int count, double a, double b);

/// Rule for ∫_0^upper f(λ) λ^r dλ: nodes in (0, upper), weights absorb λ^r.
QuadratureRule power_weighted_rule(int count, double r, double upper);

/// Composite trapezoid over sample points x with values y.
double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mixedwave

#endif  // MIXEDWAVE_QUADRATURE_HPP
