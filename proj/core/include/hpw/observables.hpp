#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "hpw/basis.hpp"
#include "hpw/matcher.hpp"

// Assembly of T-matrix tables and single differential cross-sections.

namespace hpw {

// Final-channel energy split between the two outgoing electrons.
// Ry units; tan^2(alpha0) = E_b / (E - E_b) and P^2 = E (Ry).
struct EnergyPartition {
  double e_total_ry = 0.0;
  double e_b_ry = 0.0;
  double alpha0 = 0.0;    // radians in [0, pi/2]
  double momentum = 0.0;  // P in a.u.

  static EnergyPartition from_secondary_energy(double e_total_ry, double e_b_ry);
  static EnergyPartition from_fraction(double e_total_ry, double fraction);
};

// Hermitian table of channel-pair entries, tagged with the step length that
// produced it ("corrected" tables carry provenance instead).
struct TMatrixTable {
  ChannelBasis basis;
  double energy_ry = 0.0;
  double h = 0.0;  // 0 for corrected tables
  std::string provenance;  // "h=..." or "corrected"
  Eigen::MatrixXcd t;      // N x N

  int pair_label(int i, int j) const { return i * basis.size() + j + 1; }  // P = 1..N^2
};

// Rank-one table T(n,n') = C(n) conj(C(n')).
TMatrixTable tmatrix_table(const AmplitudeVector& amp, const ChannelBasis& basis, double h);

// Hermitian quadratic form sum T(n,n') phi_n(alpha0) phi_n'(alpha0).
double t_mod_squared(const TMatrixTable& table, const EnergyPartition& part);

// Sampled SDCS in pi a0^2 / Ry against the energy fraction E_b / E.
struct SdcsCurve {
  std::vector<double> fractions;  // uniform, includes 0 and 1
  std::vector<double> values;
  Symmetry symmetry = Symmetry::singlet;
  double energy_ry = 0.0;
  std::string provenance;  // step length or "corrected"
  double kappa = 1.0;      // overall normalization convention, tagged on export
};

SdcsCurve sdcs_curve(const TMatrixTable& table, int num_samples = 80, double kappa = 1.0);

}  // namespace hpw
