#pragma once

#include <vector>

namespace hpw {

// Gauss-Legendre rule mapped to [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

// Nodes and weights on [-1, 1]; order >= 1.
QuadratureRule gauss_legendre(int order);

QuadratureRule gauss_legendre(int order, double a, double b);

}  // namespace hpw
