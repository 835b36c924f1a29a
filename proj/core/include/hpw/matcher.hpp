#pragma once

#include <Eigen/Dense>
#include <complex>

#include "hpw/coupling.hpp"
#include "hpw/propagator.hpp"

// Matching of the propagated columns onto analytic large-rho forms and
// extraction of the channel amplitude vector.
//
// After rotating to the eigenbasis of the coupling matrix, each eigenchannel
// is matched against the phase-amplitude pair
//
//   u(rho) =  sin(theta) / sqrt(theta'),   theta = rho + q log(2 rho),
//   v(rho) = -cos(theta) / sqrt(theta'),
//
// which solves F'' + (1 + 2q/rho) F = 0 up to O(1/rho^2) terms and has
// u v' - u' v = 1 identically (v is a negative cosine so the pair's
// Wronskian is +1; the sign is pure convention).

namespace hpw {

struct AsymptoticValues {
  double u, v;    // sine-like / cosine-like values
  double du, dv;  // their rho-derivatives
};

// Effective charge q, evaluated at rho; rho must be positive and should be
// far outside every channel's centrifugal turning point.
AsymptoticValues asymptotic_basis(double q, double rho);

struct AmplitudeVector {
  Eigen::VectorXcd c;  // one complex amplitude per channel
  Symmetry symmetry = Symmetry::singlet;
  double energy_ry = 0.0;
};

// Matched eigenchannel coefficient data (value/derivative match at the last
// node): column j of the solution behaves as a(k,j) u_k + b(k,j) v_k in
// eigenchannel k.
struct MatchedCoefficients {
  Eigen::MatrixXd a, b;
  double rho = 0.0;
};

MatchedCoefficients match_columns(const SolutionSet& sol, const ChargeEigensystem& eig);

// Amplitude convention (recorded in every run manifest): the physical state
// carries unit incoming flux in each eigenchannel, with eigenchannel phases
// referenced to half the diagonal scattering phases so that the result is
// invariant under column remixing and insensitive to the slow phase drift of
// the truncated asymptotic forms.  With the coupling switched off the
// amplitudes are exactly 1 in every channel.
AmplitudeVector extract_amplitudes(const SolutionSet& sol, const ChargeEigensystem& eig,
                                   const RadialGrid& grid);

}  // namespace hpw
