#pragma once

#include <Eigen/Dense>

#include "hpw/basis.hpp"

// Channel-coupling matrix of the s-wave cusp interaction
//
//   C(alpha) = -1/cos(alpha) - 1/sin(alpha) + 1/max(cos(alpha), sin(alpha))
//
// projected onto the channel harmonics and divided by the hypermomentum P.
// The stored entries carry the minus sign already, so the coupled radial
// equations read  F'' + (1 - nu(nu+1)/rho^2) F + (2 alpha_nn'/rho) F = 0
// with a plus sign in front of the coupling sum.

namespace hpw {

// C(alpha); the endpoints are integrable singularities and are rejected.
double cusp_potential(AngularPoint p);

struct CouplingMatrix {
  ChannelBasis basis;
  double momentum = 1.0;  // P in a.u.
  int quad_order = 96;
  Eigen::MatrixXd values;  // symmetric, N x N, 1/P included
};

// Builds the matrix by panel-split Gauss-Legendre quadrature; the split at
// alpha = pi/4 keeps the kink of C(alpha) on a panel boundary.
CouplingMatrix coupling_matrix(const ChannelBasis& basis, double momentum,
                               int quad_order = 96);

// Eigen-decomposition of the coupling matrix.  The eigenvalues act as
// effective channel charges in the large-rho limit of the radial equations.
struct ChargeEigensystem {
  ChannelBasis basis;
  Eigen::VectorXd charges;  // sorted descending
  Eigen::MatrixXd vectors;  // orthogonal; column k belongs to charges[k]
};

// Charges sorted descending; each eigenvector's largest-magnitude component
// is made positive so the decomposition is reproducible.
ChargeEigensystem charge_eigensystem(const CouplingMatrix& m);

}  // namespace hpw
