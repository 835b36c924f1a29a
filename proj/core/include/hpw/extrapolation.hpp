#pragma once

#include <complex>

#include "hpw/observables.hpp"

// Two-term step-length error elimination.  Three runs at steps h1 < h2 < h3
// determine the coefficients of the error model
//
//   T(h) = T* + A (h/unit)^p + B (h/unit)^{p+2},
//
// from the pairwise differences; subtracting the reconstructed error from
// any of the three inputs yields the same corrected value T*.  The default
// exponent pair is (8, 10), matching the scheme's stencil-residual order;
// steps are nondimensionalized by `unit` (default 0.005 a.u., the scale in
// which the reference weight constants are quoted).  T* is provably
// independent of the unit; A and B transform covariantly.

namespace hpw {

struct StepTriple {
  double h1 = 0.0075, h2 = 0.009, h3 = 0.01;  // a.u., strictly increasing
  double unit = 0.005;                        // nondimensionalization length

  StepTriple() = default;
  StepTriple(double a, double b, double c, double scale = 0.005);
};

struct ExtrapolationWeights {
  // A = a21 (T2 - T1) + a32 (T3 - T2);  B = b21 (T2 - T1) + b32 (T3 - T2).
  double a21 = 0.0, a32 = 0.0, b21 = 0.0, b32 = 0.0;
  int exponent = 8;
};

ExtrapolationWeights extrapolation_weights(const StepTriple& steps, int exponent = 8);

struct TwoTermResult {
  std::complex<double> t_star;  // corrected value
  std::complex<double> a;       // h^p coefficient (per (h/unit)^p)
  std::complex<double> b;       // h^{p+2} coefficient
};

TwoTermResult two_term_correct(std::complex<double> t1, std::complex<double> t2,
                               std::complex<double> t3, const StepTriple& steps,
                               int exponent = 8);

// Entrywise correction of three tables sharing basis, symmetry and energy.
struct CorrectedTable {
  TMatrixTable table;        // provenance "corrected", h = 0
  Eigen::MatrixXcd a_coeff;  // error-model coefficients per entry
  Eigen::MatrixXcd b_coeff;
  StepTriple steps;
};

CorrectedTable correct_table(const TMatrixTable& t1, const TMatrixTable& t2,
                             const TMatrixTable& t3, double unit = 0.005, int exponent = 8);

}  // namespace hpw
