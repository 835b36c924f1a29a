#include "hpw/propagator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hpw/fd_engine.hpp"

namespace hpw {

RadialGrid build_grid(double h, double r0, double momentum, double tail_rho) {
  if (!(h > 0.0)) throw std::invalid_argument("build_grid: h must be > 0");
  if (!(momentum > 0.0)) throw std::invalid_argument("build_grid: momentum must be > 0");
  RadialGrid grid;
  grid.h = h;
  grid.delta = 100.0 * h;
  grid.r0 = r0;
  grid.momentum = momentum;
  grid.inner_nodes = 101;
  if (!(r0 > grid.delta)) {
    throw std::invalid_argument("build_grid: r0 must exceed delta = 100 h");
  }
  grid.outer_steps = static_cast<int>(std::ceil((r0 - grid.delta) / (2.0 * h) - 1e-9));
  grid.r0_actual = grid.delta + grid.outer_steps * 2.0 * h;
  grid.rho_far = tail_rho > 0.0 ? tail_rho : std::max(25000.0, 1.05 * grid.rho_end());
  return grid;
}

double recommended_r0(double e_total_ry) {
  if (!(e_total_ry > 0.0)) throw std::invalid_argument("recommended_r0: energy must be > 0");
  return 5500.0 / std::sqrt(e_total_ry);
}

// ---------------------------------------------------------------------------
// Series start.
//
// Substituting F_n(rho) = sum_{j,m} c[j](n,m) rho^{s+j} log(rho)^m with
// s = nu_c + 1 into the radial system gives, at order rho^{s+j-2} log^m,
//
//   D c[j](n,m) + (m+1)(2 sigma - 1) c[j](n,m+1) + (m+2)(m+1) c[j](n,m+2)
//     + c[j-2](n,m) + 2 sum_{n'} alpha(n,n') c[j-1](n',m) = 0,
//
// where sigma = s + j and D = sigma (sigma - 1) - nu_n (nu_n + 1).  D
// vanishes exactly when j = 2 (deg_n - deg_c); at those resonant orders the
// equation determines the next-higher log coefficient instead and the
// log-free coefficient is a free regular admixture, fixed to zero.

SeriesStart::SeriesStart(const ChannelBasis& basis, const CouplingMatrix& coupling, int order) {
  if (order < 5) throw std::invalid_argument("SeriesStart: order must be >= 5");
  if (coupling.basis != basis) throw std::invalid_argument("SeriesStart: basis mismatch");
  channels_ = basis.size();
  order_ = order;
  const int N = channels_;
  const int L = order + 2;  // generous cap on log powers
  const Eigen::MatrixXd& alpha = coupling.values;

  lead_power_.resize(N);
  coeff_.assign(N, {});
  for (int c = 0; c < N; ++c) {
    const double s = nu_index(basis.degrees()[c]) + 1.0;
    lead_power_[c] = s;
    auto& cf = coeff_[c];
    cf.assign(order + 1, Eigen::MatrixXd::Zero(N, L));
    cf[0](c, 0) = 1.0;

    for (int j = 1; j <= order; ++j) {
      const double sigma = s + j;
      for (int n = 0; n < N; ++n) {
        const double nu = nu_index(basis.degrees()[n]);
        const double D = sigma * (sigma - 1.0) - nu * (nu + 1.0);
        const bool resonant = (j == 2 * (basis.degrees()[n] - basis.degrees()[c]));
        for (int m = L - 1; m >= 0; --m) {
          // Terms of the log^m equation that do not involve cf[j](n, m) or
          // cf[j](n, m+1); levels above m are already known (descending m).
          double rest = 0.0;
          if (m + 2 < L) rest += (m + 2.0) * (m + 1.0) * cf[j](n, m + 2);
          if (j >= 2) rest += cf[j - 2](n, m);
          for (int n2 = 0; n2 < N; ++n2) rest += 2.0 * alpha(n, n2) * cf[j - 1](n2, m);
          if (resonant) {
            // D = 0: the log^m equation fixes the log^{m+1} coefficient; the
            // log-free coefficient stays 0 (free regular admixture).
            if (m + 1 < L) cf[j](n, m + 1) = -rest / ((m + 1) * (2.0 * sigma - 1.0));
          } else {
            if (m + 1 < L) rest += (m + 1) * (2.0 * sigma - 1.0) * cf[j](n, m + 1);
            cf[j](n, m) = -rest / D;
          }
        }
      }
    }
  }
}

void SeriesStart::evaluate(double rho, Eigen::MatrixXd& value, Eigen::MatrixXd* derivative) const {
  const int N = channels_;
  value = Eigen::MatrixXd::Zero(N, N);
  if (derivative) *derivative = Eigen::MatrixXd::Zero(N, N);
  if (rho == 0.0) return;  // every lead power exceeds 1
  if (rho < 0.0) throw std::domain_error("SeriesStart::evaluate: rho must be >= 0");
  const double lg = std::log(rho);
  const int L = static_cast<int>(coeff_[0][0].cols());

  std::vector<double> logpow(L, 1.0);
  for (int m = 1; m < L; ++m) logpow[m] = logpow[m - 1] * lg;

  for (int c = 0; c < N; ++c) {
    const double s = lead_power_[c];
    for (int j = 0; j <= order_; ++j) {
      const double p = std::pow(rho, s + j);
      for (int n = 0; n < N; ++n) {
        for (int m = 0; m < L; ++m) {
          const double a = coeff_[c][j](n, m);
          if (a == 0.0) continue;
          value(n, c) += a * p * logpow[m];
          if (derivative) {
            double d = (s + j) * logpow[m];
            if (m > 0) d += m * logpow[m - 1];
            (*derivative)(n, c) += a * p / rho * d;
          }
        }
      }
    }
  }
}

std::vector<Eigen::MatrixXd> SeriesStart::node_values(const RadialGrid& grid) const {
  std::vector<Eigen::MatrixXd> nodes(fd_start_nodes);
  for (int k = 0; k < fd_start_nodes; ++k) evaluate(grid.inner_rho(k), nodes[k]);
  return nodes;
}

SeriesStart series_start(const ChannelBasis& basis, const CouplingMatrix& coupling, int order) {
  return SeriesStart(basis, coupling, order);
}

// ---------------------------------------------------------------------------
// Inner region.

namespace {

// W(rho) with F'' = W F:  diag(nu (nu+1)) / rho^2 - I - 2 alpha / rho.
struct CoupledW {
  Eigen::VectorXd centrifugal;  // nu (nu + 1) per channel
  const Eigen::MatrixXd* alpha;

  void operator()(double rho, double* w) const {
    const int N = static_cast<int>(centrifugal.size());
    for (int n = 0; n < N; ++n) {
      for (int n2 = 0; n2 < N; ++n2) {
        double v = -2.0 * (*alpha)(n, n2) / rho;
        if (n == n2) v += centrifugal(n) / (rho * rho) - 1.0;
        w[static_cast<std::size_t>(n) * N + n2] = v;
      }
    }
  }
};

Eigen::VectorXd centrifugal_of(const ChannelBasis& basis) {
  Eigen::VectorXd g(basis.size());
  for (int n = 0; n < basis.size(); ++n) {
    const double nu = nu_index(basis.degrees()[n]);
    g(n) = nu * (nu + 1.0);
  }
  return g;
}

}  // namespace

SolutionSet fd_inner_solve(const RadialGrid& grid, const CouplingMatrix& coupling,
                           const SeriesStart& series) {
  const int N = coupling.basis.size();
  if (series.size() != N) throw std::invalid_argument("fd_inner_solve: series/basis mismatch");

  CoupledW weval{centrifugal_of(coupling.basis), &coupling.values};
  const auto starts = series.node_values(grid);

  std::vector<double> start_flat(static_cast<std::size_t>(fd_start_nodes) * N * N);
  for (int k = 0; k < fd_start_nodes; ++k)
    for (int n = 0; n < N; ++n)
      for (int j = 0; j < N; ++j)
        start_flat[(static_cast<std::size_t>(k) * N + n) * N + j] = starts[k](n, j);

  WEval<double> w = [&weval](double rho, double* out) { weval(rho, out); };
  const auto fd = fd_solve<double>(0.0, grid.inner_step(), grid.inner_nodes, N, N, w, start_flat);

  SolutionSet sol;
  sol.inner_count = grid.inner_nodes;
  sol.rho.resize(grid.inner_nodes);
  sol.values.resize(grid.inner_nodes);
  for (int k = 0; k < grid.inner_nodes; ++k) {
    sol.rho[k] = grid.inner_rho(k);
    sol.values[k].resize(N, N);
    for (int n = 0; n < N; ++n)
      for (int j = 0; j < N; ++j) sol.values[k](n, j) = fd.at(k, n, j);
  }
  sol.rho_delta = grid.rho_delta();
  sol.deriv_delta.resize(N, N);
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < N; ++j)
      sol.deriv_delta(n, j) = fd.end_derivative[static_cast<std::size_t>(n) * N + j];
  sol.value_end = sol.values.back();
  sol.deriv_end = sol.deriv_delta;
  sol.rho_max = sol.rho_delta;
  return sol;
}

double inner_residual(const SolutionSet& sol, const CouplingMatrix& coupling,
                      const RadialGrid& grid, int node, int column) {
  if (node < 3 || node > sol.inner_count - 4)
    throw std::out_of_range("inner_residual: node must be interior");
  CoupledW weval{centrifugal_of(coupling.basis), &coupling.values};
  const detail::ImplicitStencil<double> stencil;
  const int N = coupling.basis.size();
  std::vector<double> w(static_cast<std::size_t>(N) * N);
  const double h = grid.inner_step();
  double worst = 0.0;
  double scale = 0.0;  // local F''-like magnitude of this column
  for (int n = 0; n < N; ++n) {
    double acc = 0.0;
    for (int k = -3; k <= 3; ++k) {
      const int at = node + k;
      acc += stencil.value_weight(k) * sol.values[at](n, column) / (h * h);
      scale = std::max(scale, std::abs(sol.values[at](n, column)) / (h * h));
      weval(sol.rho[at], w.data());
      for (int n2 = 0; n2 < N; ++n2)
        acc -= stencil.curvature_weight(k) * w[static_cast<std::size_t>(n) * N + n2] *
               sol.values[at](n2, column);
    }
    worst = std::max(worst, std::abs(acc));
  }
  // Closed channels span many orders of magnitude across one column, so the
  // meaningful number is the residual relative to the local solution scale.
  return worst / std::max(scale, 1e-300);
}

// ---------------------------------------------------------------------------
// Outer region: Taylor steps of size 2 P h.
//
// Derivatives are generated from the system itself,
//   F^(m+2) = sum_j C(m,j) W^(j) F^(m-j),
// with W^(j) assembled from d^j/drho^j of 1/rho^2 and 1/rho.  Columns are
// re-orthonormalized whenever their norms spread too far (closed channels
// grow exponentially until their turning points); every mixing is recorded
// and folded back into the stored tabulation afterwards, so the final
// SolutionSet is expressed in one consistent column basis.

void taylor_outer_propagate(const RadialGrid& grid, const CouplingMatrix& coupling,
                            SolutionSet& sol, int taylor_order, int store_stride) {
  const int N = coupling.basis.size();
  if (taylor_order < 2 || taylor_order > 30)
    throw std::invalid_argument("taylor_outer_propagate: order out of range");
  if (sol.values.empty() || sol.values.back().rows() != N)
    throw std::invalid_argument("taylor_outer_propagate: inner solution missing");

  const int steps = grid.outer_steps;
  if (store_stride <= 0) store_stride = std::max(1, steps / 20000);

  const Eigen::VectorXd g = centrifugal_of(coupling.basis);
  const Eigen::MatrixXd& alpha = coupling.values;
  const double eta = grid.outer_step();
  const int K = taylor_order;

  // Binomial table up to K.
  std::vector<std::vector<double>> binom(K + 1, std::vector<double>(K + 1, 0.0));
  for (int m = 0; m <= K; ++m) {
    binom[m][0] = 1.0;
    for (int j = 1; j <= m; ++j)
      binom[m][j] = binom[m - 1][j - 1] + ((j <= m - 1) ? binom[m - 1][j] : 0.0);
  }

  Eigen::MatrixXd F = sol.values.back();
  Eigen::MatrixXd Fp = sol.deriv_delta;
  double rho = sol.rho_delta;

  std::vector<Eigen::MatrixXd> deriv(K + 2), gd(K + 2), ad(K + 2);
  std::vector<std::pair<std::size_t, Eigen::MatrixXd>> mixings;  // (stored count, R)

  const int ncols = static_cast<int>(F.cols());
  for (int t = 1; t <= steps; ++t) {
    // Derivatives at the current node.
    deriv[0] = F;
    deriv[1] = Fp;
    for (int m = 0; m + 2 <= K + 1; ++m) {
      gd[m] = g.asDiagonal() * deriv[m];
      ad[m] = alpha * deriv[m];
      Eigen::MatrixXd next = -deriv[m];  // the -I part of W (j = 0 only)
      double dj = 1.0 / (rho * rho);     // d^j/drho^j of rho^-2, starts at j=0
      double ej = 1.0 / rho;             // d^j/drho^j of rho^-1
      for (int j = 0; j <= m; ++j) {
        if (j > 0) {
          dj *= -(j + 1.0) / rho;
          ej *= -static_cast<double>(j) / rho;
        }
        next += binom[m][j] * (dj * gd[m - j] - 2.0 * ej * ad[m - j]);
      }
      deriv[m + 2] = next;
    }

    // Horner-style evaluation of the Taylor polynomials at rho + eta.
    Eigen::MatrixXd vnew = deriv[K];
    for (int m = K - 1; m >= 0; --m) vnew = deriv[m] + (eta / (m + 1.0)) * vnew;
    Eigen::MatrixXd dnew = deriv[K + 1];
    for (int m = K; m >= 1; --m) dnew = deriv[m] + (eta / m) * dnew;

    F = vnew;
    Fp = dnew;
    rho += eta;
    if (!F.allFinite() || !Fp.allFinite()) {
      throw std::runtime_error("taylor_outer_propagate: non-finite value at outer step " +
                               std::to_string(t));
    }

    if (t % store_stride == 0 || t == steps) {
      sol.rho.push_back(rho);
      sol.values.push_back(F);
    }

    // Column norm spread check; re-orthonormalize the (value, slope) stack
    // when closed-channel growth starts to swamp the small columns.
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int j = 0; j < ncols; ++j) {
      const double s = std::max(F.col(j).cwiseAbs().maxCoeff(), Fp.col(j).cwiseAbs().maxCoeff());
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    if (t < steps && (hi > 1e10 || (lo > 0.0 && hi / lo > 1e8))) {
      Eigen::MatrixXd stack(2 * N, ncols);
      stack.topRows(N) = F;
      stack.bottomRows(N) = Fp;
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(stack);
      Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(2 * N, ncols);
      Eigen::MatrixXd r = qr.matrixQR().topRows(ncols).triangularView<Eigen::Upper>();
      for (int j = 0; j < ncols; ++j) {
        if (r(j, j) < 0.0) {
          r.row(j) = -r.row(j);
          q.col(j) = -q.col(j);
        }
      }
      F = q.topRows(N);
      Fp = q.bottomRows(N);
      mixings.emplace_back(sol.values.size(), r);
      ++sol.stabilizations;
    }
  }

  sol.value_end = F;
  sol.deriv_end = Fp;
  sol.rho_max = rho;

  // Fold every mixing back into the earlier tabulation: a node stored before
  // mixing t needs the suffix product R_t^-1 R_{t+1}^-1 ... applied.
  if (!mixings.empty()) {
    Eigen::MatrixXd suffix = Eigen::MatrixXd::Identity(ncols, ncols);
    std::size_t upto = sol.values.size();
    for (auto it = mixings.rbegin(); it != mixings.rend(); ++it) {
      for (std::size_t s = it->first; s < upto; ++s) sol.values[s] = sol.values[s] * suffix;
      upto = it->first;
      // suffix <- R^-1 * suffix
      suffix = it->second.triangularView<Eigen::Upper>().solve(suffix);
    }
    for (std::size_t s = 0; s < upto; ++s) sol.values[s] = sol.values[s] * suffix;
    sol.deriv_delta = sol.deriv_delta * suffix;
  }

  // Diagnostic: the end-value matrix must stay numerically independent.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sol.value_end);
  const double smin = svd.singularValues().minCoeff();
  sol.end_condition = (smin > 0.0) ? svd.singularValues().maxCoeff() / smin
                                   : std::numeric_limits<double>::infinity();
}

double measure_fd_order(const std::vector<double>& steps) {
  // Self-contained order probe on F'' + F = 0 over [0.5, 4.5] with exact
  // sine starts; avoids any dependency on the paths being validated.  The
  // scheme's truncation error sits below the double rounding floor at usable
  // steps, so the probe runs in extended precision.
  if (steps.size() < 2) throw std::invalid_argument("measure_fd_order: need >= 2 steps");
  const long double a = 0.5L, b = 4.5L;
  std::vector<double> lh, le;
  WEval<long double> w = [](long double, long double* out) { *out = -1.0L; };
  for (double h : steps) {
    const int K = static_cast<int>(std::lround(static_cast<double>((b - a)) / h)) + 1;
    std::vector<long double> start(fd_start_nodes);
    for (int k = 0; k < fd_start_nodes; ++k) start[k] = std::sin(a + k * static_cast<long double>(h));
    const auto fd = fd_solve<long double>(a, static_cast<long double>(h), K, 1, 1, w, start);
    long double err = 0.0L;
    for (int k = 0; k < K; ++k)
      err = std::max(err, std::abs(fd.at(k, 0, 0) - std::sin(a + k * static_cast<long double>(h))));
    lh.push_back(std::log(h));
    le.push_back(static_cast<double>(std::log(std::max(err, 1e-300L))));
  }
  const double n = static_cast<double>(lh.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lh.size(); ++i) {
    sx += lh[i];
    sy += le[i];
    sxx += lh[i] * lh[i];
    sxy += lh[i] * le[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hpw
