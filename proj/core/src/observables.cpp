#include "hpw/observables.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace hpw {

EnergyPartition EnergyPartition::from_secondary_energy(double e_total_ry, double e_b_ry) {
  if (!(e_total_ry > 0.0)) throw std::invalid_argument("EnergyPartition: total energy must be > 0");
  if (!(e_b_ry >= 0.0 && e_b_ry <= e_total_ry))
    throw std::invalid_argument("EnergyPartition: secondary energy outside [0, E]");
  return from_fraction(e_total_ry, e_b_ry / e_total_ry);
}

EnergyPartition EnergyPartition::from_fraction(double e_total_ry, double fraction) {
  if (!(e_total_ry > 0.0)) throw std::invalid_argument("EnergyPartition: total energy must be > 0");
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("EnergyPartition: fraction outside [0, 1]");
  EnergyPartition part;
  part.e_total_ry = e_total_ry;
  part.e_b_ry = fraction * e_total_ry;
  // alpha0 = arcsin(sqrt(f)) gives tan^2(alpha0) = f/(1-f) = E_b/(E-E_b)
  // and lands on pi/2 exactly at f = 1.
  part.alpha0 = std::asin(std::sqrt(fraction));
  part.momentum = std::sqrt(e_total_ry);
  return part;
}

TMatrixTable tmatrix_table(const AmplitudeVector& amp, const ChannelBasis& basis, double h) {
  if (amp.c.size() != basis.size())
    throw std::invalid_argument("tmatrix_table: amplitude/basis size mismatch");
  if (basis.symmetry() != amp.symmetry)
    throw std::invalid_argument("tmatrix_table: symmetry mismatch");
  if (!amp.c.allFinite()) throw std::invalid_argument("tmatrix_table: non-finite amplitudes");
  std::string provenance = "corrected";
  if (h > 0.0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "h=%.6g", h);
    provenance = buf;
  }
  return TMatrixTable{basis, amp.energy_ry, h, provenance, amp.c * amp.c.adjoint()};
}

double t_mod_squared(const TMatrixTable& table, const EnergyPartition& part) {
  if (std::abs(table.energy_ry - part.e_total_ry) > 1e-9 * std::max(1.0, table.energy_ry))
    throw std::invalid_argument("t_mod_squared: table and partition disagree on the energy");
  const int n = table.basis.size();
  Eigen::VectorXd phi(n);
  const AngularPoint p(part.alpha0);
  for (int i = 0; i < n; ++i)
    phi(i) = angular_harmonic(table.basis.degrees()[i], table.basis.symmetry(), p);
  const std::complex<double> q = phi.cast<std::complex<double>>().dot(table.t * phi);
  return q.real();
}

SdcsCurve sdcs_curve(const TMatrixTable& table, int num_samples, double kappa) {
  if (num_samples < 2) throw std::invalid_argument("sdcs_curve: need at least 2 samples");
  SdcsCurve curve;
  curve.symmetry = table.basis.symmetry();
  curve.energy_ry = table.energy_ry;
  curve.provenance = table.provenance;
  curve.kappa = kappa;
  curve.fractions.resize(num_samples);
  curve.values.resize(num_samples);
  for (int i = 0; i < num_samples; ++i) {
    const double f = static_cast<double>(i) / (num_samples - 1);
    curve.fractions[i] = f;
    curve.values[i] = kappa * t_mod_squared(table, EnergyPartition::from_fraction(table.energy_ry, f));
  }
  return curve;
}

}  // namespace hpw
