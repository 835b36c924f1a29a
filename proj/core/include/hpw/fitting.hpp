#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

// Least-squares models for SDCS curves: the kinked linear-linear family
// y = a + b x + c |x - d| used for singlet data, and plain polynomials of
// degree <= 6 for triplet data.  x is the secondary-electron energy in Ry.

namespace hpw {

struct DataSet {
  std::vector<double> x;  // Ry
  std::vector<double> y;  // pi a0^2 / Ry
  std::vector<int> trimmed;  // original indices removed by trim_extremes

  int size() const { return static_cast<int>(x.size()); }
};

struct LinLinModel {
  double a = 0, b = 0, c = 0, d = 0;
  bool d_identifiable = true;  // false when c ~ 0 makes the kink meaningless
};

struct PolyModel {
  std::vector<double> coeffs;  // ascending powers
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

using FitModel = std::variant<LinLinModel, PolyModel>;

double eval_model(const FitModel& model, double x);
double residual_norm(const FitModel& model, const DataSet& data);

// Drops up to max_drop points, always taken from the current extreme-x ends,
// largest absolute deviation from the (re-fitted) preliminary model first;
// stops early once the end residuals look like the bulk.  Interior points
// are never dropped.
DataSet trim_extremes(const DataSet& data, int max_drop,
                      const std::function<FitModel(const DataSet&)>& fit);

// Least squares for y = a + b x + c |x - d|: dense grid search in d followed
// by golden-section refinement, linear solve for (a, b, c) at each candidate.
LinLinModel fit_linlin(const DataSet& data);

// Polynomial least squares on column-scaled monomials, degree in [0, 6].
PolyModel fit_poly(const DataSet& data, int degree);

}  // namespace hpw
