#include "mixedwave/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace mixedwave {

QuadratureRule gauss_jacobi(int count, double alpha, double beta) {
  if (count < 1) throw std::invalid_argument("quadrature needs at least one node");
  if (!(alpha > -1.0) || !(beta > -1.0)) {
    throw std::invalid_argument("Jacobi parameters must exceed -1");
  }
  const double ab = alpha + beta;
  Eigen::VectorXd diag(count);
  Eigen::VectorXd off(count > 1 ? count - 1 : 0);
  diag(0) = (beta - alpha) / (ab + 2.0);
  for (int k = 1; k < count; ++k) {
    const double s = 2.0 * k + ab;
    diag(k) = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    off(k - 1) = std::sqrt(num / den);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Golub-Welsch eigensolve failed");

  const double log_mu0 = (ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                         std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0);
  const double mu0 = std::exp(log_mu0);

  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  for (int k = 0; k < count; ++k) {
    rule.nodes[k] = solver.eigenvalues()(k);
    const double v0 = solver.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

QuadratureRule gauss_legendre(int count, double a, double b) {
  QuadratureRule rule = gauss_jacobi(count, 0.0, 0.0);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    rule.nodes[k] = mid + half * rule.nodes[k];
    rule.weights[k] *= half;
  }
  return rule;
}

QuadratureRule power_weighted_rule(int count, double r, double upper) {
  if (!(r > -1.0)) throw std::invalid_argument("power weight exponent must exceed -1");
  if (!(upper > 0.0)) throw std::invalid_argument("upper limit must be positive");
  // λ = upper (1+x)/2 maps λ^r dλ to (upper/2)^{r+1} (1+x)^r dx.
  QuadratureRule rule = gauss_jacobi(count, 0.0, r);
  const double scale = std::pow(0.5 * upper, r + 1.0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    rule.nodes[k] = 0.5 * upper * (1.0 + rule.nodes[k]);
    rule.weights[k] *= scale;
  }
  return rule;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  }
  return sum;
}

}  // namespace mixedwave
