#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hpw/banded.hpp"
#include "hpw/fd_weights.hpp"

// Uniform-grid solver for second-order linear systems F'' = W(rho) F with the
// first six node values prescribed.
//
// The interior uses the symmetric seven-node implicit discretization
//
//   sum_{k=-3}^{3} a_k F_{i+k}  =  h^2 sum_{k=-3}^{3} b_k (W F)_{i+k},
//
// with (a, b) fixed by Taylor matching: the unique symmetric weight pair that
// annihilates all even orders through h^12, leaving an equation residual of
// order h^14 y^(14).  Marching any seven-node stencil explicitly is
// exponentially unstable (parasitic characteristic roots of modulus up to
// ~14), so the region is assembled as one banded linear system: prescribed
// start values, centered implicit equations where the stencil fits, and two
// one-sided ten-node closure equations at the right edge.  Partial pivoting
// handles the growing/decaying mode dichotomy, and two rounds of
// mixed-precision iterative refinement remove the eps/h^2 rounding floor of
// the raw solve.

namespace hpw {

namespace detail {

template <class Real>
struct accumulate_type {
  using type = Real;
};
template <>
struct accumulate_type<double> {
  using type = long double;
};
#if defined(__SIZEOF_FLOAT128__)
template <>
struct accumulate_type<long double> {
  using type = __float128;
};
#endif

// Taylor-matched implicit stencil weights, exact rationals.
template <class Real>
struct ImplicitStencil {
  Real a[4];  // a_0, a_1, a_2, a_3 (symmetric)
  Real b[4];  // b_0, b_1, b_2, b_3 (symmetric), normalized to sum b = 1

  ImplicitStencil() {
    a[0] = Real(-23233) / Real(31284);
    a[1] = Real(2511) / Real(13904);
    a[2] = Real(567) / Real(3160);
    a[3] = Real(7069) / Real(625680);
    b[0] = Real(181327) / Real(364980);
    b[1] = Real(109971) / Real(486640);
    b[2] = Real(6129) / Real(243320);
    b[3] = Real(619) / Real(1459920);
  }
  Real value_weight(int k) const { return a[k < 0 ? -k : k]; }
  Real curvature_weight(int k) const { return b[k < 0 ? -k : k]; }
};

}  // namespace detail

template <class Real>
struct FdSolution {
  int node_count = 0;
  int channels = 0;
  int columns = 0;
  std::vector<Real> data;            // [(k * channels + n) * columns + j]
  std::vector<Real> end_derivative;  // [n * columns + j]

  Real& at(int k, int n, int j) {
    return data[(static_cast<std::size_t>(k) * channels + n) * columns + j];
  }
  Real at(int k, int n, int j) const {
    return data[(static_cast<std::size_t>(k) * channels + n) * columns + j];
  }
};

// eval_w fills w (channels x channels, row-major) with W(rho).
template <class Real>
using WEval = std::function<void(Real rho, Real* w)>;

inline constexpr int fd_start_nodes = 6;
inline constexpr int fd_tail_nodes = 10;

// start_values: [(k * channels + n) * columns + j] for k = 0..5.
template <class Real>
FdSolution<Real> fd_solve(Real rho0, Real step, int node_count, int channels, int columns,
                          const WEval<Real>& eval_w, const std::vector<Real>& start_values) {
  const int K = node_count;
  const int C = channels;
  if (K < fd_start_nodes + fd_tail_nodes)
    throw std::invalid_argument("fd_solve: need at least 16 nodes");
  if (C < 1 || columns < 1) throw std::invalid_argument("fd_solve: bad shape");
  if (start_values.size() != static_cast<std::size_t>(fd_start_nodes) * C * columns)
    throw std::invalid_argument("fd_solve: start_values must cover six nodes");

  FdSolution<Real> sol;
  sol.node_count = K;
  sol.channels = C;
  sol.columns = columns;
  sol.data.assign(static_cast<std::size_t>(K) * C * columns, Real(0));
  std::copy(start_values.begin(), start_values.end(), sol.data.begin());

  // W on every node the stencils can touch (2 .. K-1).
  std::vector<std::vector<Real>> wcache(K);
  for (int k = 2; k < K; ++k) {
    wcache[k].resize(static_cast<std::size_t>(C) * C);
    eval_w(rho0 + k * step, wcache[k].data());
  }

  const detail::ImplicitStencil<Real> stencil;
  std::vector<Real> tail_nodes(fd_tail_nodes);
  for (int k = 0; k < fd_tail_nodes; ++k) tail_nodes[k] = Real(k);
  const auto tail_m2 = fd_weights<Real>(Real(fd_tail_nodes - 2), tail_nodes, 2)[2];
  const auto tail_m1 = fd_weights<Real>(Real(fd_tail_nodes - 1), tail_nodes, 2)[2];
  const auto tail_d1 = fd_weights<Real>(Real(fd_tail_nodes - 1), tail_nodes, 1)[1];

  const Real h2 = step * step;
  const int nu = (K - fd_start_nodes) * C;  // unknown nodes 6..K-1
  const int kl = fd_tail_nodes * C - 1;
  const int ku = 3 * C - 1;
  BandedMatrix<Real> band(nu, kl, ku);
  std::vector<std::vector<Real>> rhs(columns, std::vector<Real>(nu, Real(0)));

  auto unknown = [&](int k, int n) { return (k - fd_start_nodes) * C + n; };

  // One scalar stencil term; val * F(node k, channel n) goes into the matrix
  // when node k is an unknown and onto the right-hand side otherwise.
  auto put = [&](int row, int k, int n, Real val) {
    if (k >= fd_start_nodes) {
      band.add(row, unknown(k, n), val);
    } else {
      for (int j = 0; j < columns; ++j)
        rhs[j][row] -= val * start_values[(static_cast<std::size_t>(k) * C + n) * columns + j];
    }
  };

  // Centered implicit equations.
  for (int i = 5; i <= K - 4; ++i) {
    const int row_block = i - 5;
    for (int n = 0; n < C; ++n) {
      const int row = row_block * C + n;
      for (int k = -3; k <= 3; ++k) {
        const int node = i + k;
        put(row, node, n, stencil.value_weight(k));
        const Real bw = h2 * stencil.curvature_weight(k);
        const Real* w = wcache[node].data();
        for (int n2 = 0; n2 < C; ++n2)
          put(row, node, n2, -bw * w[static_cast<std::size_t>(n) * C + n2]);
      }
    }
  }
  // One-sided closures at the last two nodes (explicit in W).
  auto closure = [&](int row_block, int eval_node, const std::vector<Real>& weights) {
    const Real* w = wcache[eval_node].data();
    for (int n = 0; n < C; ++n) {
      const int row = row_block * C + n;
      for (int t = 0; t < fd_tail_nodes; ++t)
        put(row, K - fd_tail_nodes + t, n, weights[t]);
      for (int n2 = 0; n2 < C; ++n2)
        put(row, eval_node, n2, -h2 * w[static_cast<std::size_t>(n) * C + n2]);
    }
  };
  closure(K - 8, K - 2, tail_m2);
  closure(K - 7, K - 1, tail_m1);

  BandedMatrix<Real> factored = band;  // keep the assembled matrix for refinement
  if (!factored.factor())
    throw std::runtime_error("fd_solve: singular band matrix (check step/grid)");

  using Acc = typename detail::accumulate_type<Real>::type;
  std::vector<Real> x(nu), delta(nu);
  std::vector<Acc> resid(nu);
  for (int j = 0; j < columns; ++j) {
    x = rhs[j];
    factored.solve(x);
    // Two rounds of iterative refinement with extended-precision residuals.
    for (int pass = 0; pass < 2; ++pass) {
      for (int r = 0; r < nu; ++r) resid[r] = static_cast<Acc>(rhs[j][r]);
      for (int col = 0; col < nu; ++col) {
        const Acc xc = static_cast<Acc>(x[col]);
        const int r_lo = std::max(0, col - ku), r_hi = std::min(nu - 1, col + kl);
        for (int r = r_lo; r <= r_hi; ++r)
          resid[r] -= static_cast<Acc>(band.get(r, col)) * xc;
      }
      for (int r = 0; r < nu; ++r) delta[r] = static_cast<Real>(resid[r]);
      factored.solve(delta);
      for (int r = 0; r < nu; ++r) x[r] += delta[r];
    }
    for (int k = fd_start_nodes; k < K; ++k)
      for (int n = 0; n < C; ++n) sol.at(k, n, j) = x[unknown(k, n)];
  }

  sol.end_derivative.assign(static_cast<std::size_t>(C) * columns, Real(0));
  for (int n = 0; n < C; ++n)
    for (int j = 0; j < columns; ++j) {
      Real d = Real(0);
      for (int t = 0; t < fd_tail_nodes; ++t)
        d += tail_d1[t] * sol.at(K - fd_tail_nodes + t, n, j);
      sol.end_derivative[static_cast<std::size_t>(n) * columns + j] = d / step;
    }
  return sol;
}

// Max-abs residual of the centered implicit equation at interior node i
// (3 <= i <= K-4), scaled like F''; spot check that a solution satisfies the
// discrete scheme.
template <class Real>
Real fd_equation_residual(const FdSolution<Real>& sol, Real rho0, Real step,
                          const WEval<Real>& eval_w, int i, int column) {
  if (i < 3 || i > sol.node_count - 4) throw std::out_of_range("fd_equation_residual: node");
  const detail::ImplicitStencil<Real> stencil;
  const int C = sol.channels;
  std::vector<Real> w(static_cast<std::size_t>(C) * C);
  Real worst = Real(0);
  for (int n = 0; n < C; ++n) {
    Real acc = Real(0);
    for (int k = -3; k <= 3; ++k) {
      const int node = i + k;
      acc += stencil.value_weight(k) * sol.at(node, n, column) / (step * step);
      eval_w(rho0 + node * step, w.data());
      for (int n2 = 0; n2 < C; ++n2)
        acc -= stencil.curvature_weight(k) * w[static_cast<std::size_t>(n) * C + n2] *
               sol.at(node, n2, column);
    }
    worst = std::max(worst, detail::scalar_abs(acc));
  }
  return worst;
}

}  // namespace hpw
