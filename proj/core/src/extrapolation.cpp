#include "hpw/extrapolation.hpp"

#include <cmath>
#include <stdexcept>

namespace hpw {

StepTriple::StepTriple(double a, double b, double c, double scale)
    : h1(a), h2(b), h3(c), unit(scale) {
  if (!(h1 > 0.0 && h1 < h2 && h2 < h3))
    throw std::invalid_argument("StepTriple: require 0 < h1 < h2 < h3, pairwise distinct");
  if (!(unit > 0.0)) throw std::invalid_argument("StepTriple: unit must be > 0");
}

ExtrapolationWeights extrapolation_weights(const StepTriple& steps, int exponent) {
  if (exponent < 1) throw std::invalid_argument("extrapolation_weights: exponent must be >= 1");
  const double x1 = steps.h1 / steps.unit;
  const double x2 = steps.h2 / steps.unit;
  const double x3 = steps.h3 / steps.unit;
  const double p1 = std::pow(x1, exponent), p2 = std::pow(x2, exponent), p3 = std::pow(x3, exponent);
  const double q1 = std::pow(x1, exponent + 2), q2 = std::pow(x2, exponent + 2),
               q3 = std::pow(x3, exponent + 2);

  const double det = (p2 - p1) * (q3 - q2) - (p3 - p2) * (q2 - q1);
  if (det == 0.0 || !std::isfinite(det))
    throw std::invalid_argument("extrapolation_weights: degenerate step triple (zero determinant)");

  ExtrapolationWeights w;
  w.exponent = exponent;
  w.a21 = (q3 - q2) / det;
  w.a32 = -(q2 - q1) / det;
  w.b21 = -(p3 - p2) / det;
  w.b32 = (p2 - p1) / det;
  return w;
}

TwoTermResult two_term_correct(std::complex<double> t1, std::complex<double> t2,
                               std::complex<double> t3, const StepTriple& steps, int exponent) {
  const ExtrapolationWeights w = extrapolation_weights(steps, exponent);
  const std::complex<double> d21 = t2 - t1;
  const std::complex<double> d32 = t3 - t2;
  TwoTermResult r;
  r.a = w.a21 * d21 + w.a32 * d32;
  r.b = w.b21 * d21 + w.b32 * d32;
  const double x1 = steps.h1 / steps.unit;
  r.t_star = t1 - r.a * std::pow(x1, exponent) - r.b * std::pow(x1, exponent + 2);
  return r;
}

CorrectedTable correct_table(const TMatrixTable& t1, const TMatrixTable& t2,
                             const TMatrixTable& t3, double unit, int exponent) {
  if (!(t1.basis == t2.basis && t2.basis == t3.basis))
    throw std::invalid_argument("correct_table: tables use different channel bases");
  if (t1.energy_ry != t2.energy_ry || t2.energy_ry != t3.energy_ry)
    throw std::invalid_argument("correct_table: tables computed at different energies");
  const StepTriple steps(t1.h, t2.h, t3.h, unit);

  const int n = t1.basis.size();
  CorrectedTable out{TMatrixTable{t1.basis, t1.energy_ry, 0.0, "corrected",
                                  Eigen::MatrixXcd(n, n)},
                     Eigen::MatrixXcd(n, n), Eigen::MatrixXcd(n, n), steps};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const TwoTermResult r = two_term_correct(t1.t(i, j), t2.t(i, j), t3.t(i, j), steps, exponent);
      out.table.t(i, j) = r.t_star;
      out.a_coeff(i, j) = r.a;
      out.b_coeff(i, j) = r.b;
    }
  }
  return out;
}

}  // namespace hpw
