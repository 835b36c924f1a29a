#pragma once

#include <stdexcept>
#include <vector>

namespace hpw {

// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
// Returns w[m][k] such that f^(m)(x0) ~= sum_k w[m][k] f(nodes[k]) for
// m = 0..max_order.
template <class Real>
std::vector<std::vector<Real>> fd_weights(Real x0, const std::vector<Real>& nodes,
                                          int max_order) {
  const int n = static_cast<int>(nodes.size());
  if (n < 1) throw std::invalid_argument("fd_weights: need at least one node");
  if (max_order < 0 || max_order >= n)
    throw std::invalid_argument("fd_weights: order must satisfy 0 <= m < node count");

  std::vector<std::vector<Real>> delta(max_order + 1, std::vector<Real>(n, Real(0)));
  delta[0][0] = Real(1);
  Real c1 = Real(1);
  for (int i = 1; i < n; ++i) {
    Real c2 = Real(1);
    const Real xi = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const Real c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int m = std::min(i, max_order); m >= 1; --m) {
          delta[m][i] = c1 * (m * delta[m - 1][i - 1] - (nodes[i - 1] - x0) * delta[m][i - 1]) / c2;
        }
        delta[0][i] = -c1 * (nodes[i - 1] - x0) * delta[0][i - 1] / c2;
      }
      for (int m = std::min(i, max_order); m >= 1; --m) {
        delta[m][j] = (xi * delta[m][j] - m * delta[m - 1][j]) / c3;
      }
      delta[0][j] = xi * delta[0][j] / c3;
    }
    c1 = c2;
  }
  return delta;
}

}  // namespace hpw
