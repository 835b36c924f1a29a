#include "hpw/coupling.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hpw/quadrature.hpp"

namespace hpw {

double cusp_potential(AngularPoint p) {
  const double a = p.alpha;
  if (a <= 0.0 || a >= std::numbers::pi / 2) {
    throw std::domain_error("cusp_potential: alpha must lie strictly inside (0, pi/2)");
  }
  const double c = std::cos(a);
  const double s = std::sin(a);
  return -1.0 / c - 1.0 / s + 1.0 / std::max(c, s);
}

CouplingMatrix coupling_matrix(const ChannelBasis& basis, double momentum, int quad_order) {
  if (!(momentum > 0.0)) throw std::invalid_argument("coupling_matrix: momentum must be > 0");
  if (quad_order < 32) throw std::invalid_argument("coupling_matrix: quad_order must be >= 32");

  const int n = basis.size();
  const double quarter = std::numbers::pi / 4;
  const QuadratureRule panels[2] = {
      gauss_legendre(quad_order, 0.0, quarter),
      gauss_legendre(quad_order, quarter, 2.0 * quarter),
  };

  // Tabulate the 1D-normalized harmonics u_n = 4*pi*phi_n and the shared
  // factor C(alpha) sin^2(alpha) cos^2(alpha) on all nodes.
  const double four_pi = 4.0 * std::numbers::pi;
  Eigen::MatrixXd u(2 * quad_order, n);
  Eigen::VectorXd cw(2 * quad_order);
  for (int p = 0; p < 2; ++p) {
    for (int q = 0; q < quad_order; ++q) {
      const int row = p * quad_order + q;
      const AngularPoint point(panels[p].nodes[q]);
      const double s = std::sin(point.alpha);
      const double c = std::cos(point.alpha);
      cw(row) = cusp_potential(point) * s * s * c * c * panels[p].weights[q];
      for (int j = 0; j < n; ++j) {
        u(row, j) = four_pi * angular_harmonic(basis.degrees()[j], basis.symmetry(), point);
      }
    }
  }

  // One momentum-independent integral; the 1/P scaling is applied afterwards
  // so matrices at different P differ by an exact elementwise factor.
  CouplingMatrix out{basis, momentum, quad_order, Eigen::MatrixXd(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double sum = 0.0;
      for (int row = 0; row < 2 * quad_order; ++row) sum += u(row, i) * cw(row) * u(row, j);
      const double value = -sum / momentum;  // minus sign folded in
      out.values(i, j) = value;
      out.values(j, i) = value;
    }
  }
  return out;
}

ChargeEigensystem charge_eigensystem(const CouplingMatrix& m) {
  const int n = m.basis.size();
  if (m.values.rows() != n || m.values.cols() != n ||
      !m.values.isApprox(m.values.transpose(), 1e-12)) {
    throw std::invalid_argument("charge_eigensystem: matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.values);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "charge_eigensystem: eigensolver failed to converge on\n" << m.values;
    throw std::runtime_error(os.str());
  }

  // Eigen returns ascending order; flip to descending and fix signs.
  ChargeEigensystem eig{m.basis, Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (int k = 0; k < n; ++k) {
    eig.charges(k) = solver.eigenvalues()(n - 1 - k);
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - k);
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    eig.vectors.col(k) = v;
  }
  return eig;
}

}  // namespace hpw
