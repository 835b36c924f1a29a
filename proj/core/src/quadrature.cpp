#include "hpw/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hpw {

// Legendre P_n(x) and derivative via the standard recurrence.
static void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = (n == 0) ? p0 : p1;
  dp = (n == 0) ? 0.0 : n * (x * p1 - p0) / (x * x - 1.0);
}

QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(order, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_pair(order, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[order - 1 - i] = x;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

QuadratureRule gauss_legendre(int order, double a, double b) {
  QuadratureRule rule = gauss_legendre(order);
  const double mid = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = mid + hw * rule.nodes[i];
    rule.weights[i] *= hw;
  }
  return rule;
}

}  // namespace hpw
