#include "hpw/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hpw {

double eval_model(const FitModel& model, double x) {
  if (const auto* lin = std::get_if<LinLinModel>(&model)) {
    return lin->a + lin->b * x + lin->c * std::abs(x - lin->d);
  }
  const auto& poly = std::get<PolyModel>(model);
  double v = 0.0;
  for (auto it = poly.coeffs.rbegin(); it != poly.coeffs.rend(); ++it) v = v * x + *it;
  return v;
}

double residual_norm(const FitModel& model, const DataSet& data) {
  double ss = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const double r = data.y[i] - eval_model(model, data.x[i]);
    ss += r * r;
  }
  return std::sqrt(ss);
}

namespace {

// Linear least squares for (a, b, c) at fixed kink position d; returns the
// residual sum of squares.
double linlin_at_kink(const DataSet& data, double d, double out[3]) {
  const int n = data.size();
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = data.x[i];
    design(i, 2) = std::abs(data.x[i] - d);
    rhs(i) = data.y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd sol = qr.solve(rhs);
  out[0] = sol(0);
  out[1] = sol(1);
  out[2] = sol(2);
  return (design * sol - rhs).squaredNorm();
}

}  // namespace

LinLinModel fit_linlin(const DataSet& data) {
  const int n = data.size();
  if (n < 4) throw std::invalid_argument("fit_linlin: need at least 4 points");
  const auto [xmin_it, xmax_it] = std::minmax_element(data.x.begin(), data.x.end());
  const double xmin = *xmin_it, xmax = *xmax_it;
  if (!(xmax > xmin)) throw std::invalid_argument("fit_linlin: degenerate x range");

  // Dense scan of the kink position, then golden-section refinement around
  // the best grid node.  The residual is continuous in d (piecewise smooth
  // with kinks at the data abscissae), so a local bracket is enough.
  constexpr int grid_nodes = 1000;
  double best_d = xmin, best_ss = std::numeric_limits<double>::infinity();
  double coeff[3] = {0, 0, 0};
  for (int i = 0; i < grid_nodes; ++i) {
    const double d = xmin + (xmax - xmin) * i / (grid_nodes - 1.0);
    const double ss = linlin_at_kink(data, d, coeff);
    if (ss < best_ss) {
      best_ss = ss;
      best_d = d;
    }
  }
  if (!std::isfinite(best_ss)) throw std::invalid_argument("fit_linlin: collinear design matrix");

  const double step = (xmax - xmin) / (grid_nodes - 1.0);
  double lo = std::max(xmin, best_d - step);
  double hi = std::min(xmax, best_d + step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double m1 = hi - invphi * (hi - lo);
  double m2 = lo + invphi * (hi - lo);
  double f1 = linlin_at_kink(data, m1, coeff);
  double f2 = linlin_at_kink(data, m2, coeff);
  for (int it = 0; it < 120 && (hi - lo) > 1e-13 * (xmax - xmin); ++it) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - invphi * (hi - lo);
      f1 = linlin_at_kink(data, m1, coeff);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + invphi * (hi - lo);
      f2 = linlin_at_kink(data, m2, coeff);
    }
  }
  double d_final = 0.5 * (lo + hi);
  double ss_final = linlin_at_kink(data, d_final, coeff);
  if (best_ss < ss_final) {  // golden section never accepts a worse point
    d_final = best_d;
    ss_final = linlin_at_kink(data, d_final, coeff);
  }

  LinLinModel model;
  model.a = coeff[0];
  model.b = coeff[1];
  model.c = coeff[2];
  model.d = d_final;
  double yscale = 0.0;
  for (double y : data.y) yscale = std::max(yscale, std::abs(y));
  model.d_identifiable = std::abs(model.c) * (xmax - xmin) > 1e-9 * std::max(yscale, 1e-300);
  return model;
}

PolyModel fit_poly(const DataSet& data, int degree) {
  if (degree < 0 || degree > 6) throw std::invalid_argument("fit_poly: degree must be in [0, 6]");
  const int n = data.size();
  if (n < degree + 1) throw std::invalid_argument("fit_poly: not enough points for the degree");

  double xscale = 0.0;
  for (double x : data.x) xscale = std::max(xscale, std::abs(x));
  if (xscale == 0.0) xscale = 1.0;

  Eigen::MatrixXd design(n, degree + 1);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    double t = 1.0;
    for (int k = 0; k <= degree; ++k) {
      design(i, k) = t;
      t *= data.x[i] / xscale;
    }
    rhs(i) = data.y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < degree + 1)
    throw std::invalid_argument("fit_poly: rank-deficient design matrix");
  const Eigen::VectorXd sol = qr.solve(rhs);

  PolyModel model;
  model.coeffs.resize(degree + 1);
  double s = 1.0;
  for (int k = 0; k <= degree; ++k) {
    model.coeffs[k] = sol(k) / s;
    s *= xscale;
  }
  return model;
}

DataSet trim_extremes(const DataSet& data, int max_drop,
                      const std::function<FitModel(const DataSet&)>& fit) {
  const int n = data.size();
  if (max_drop < 0) throw std::invalid_argument("trim_extremes: max_drop must be >= 0");
  if (max_drop > n / 10)
    throw std::invalid_argument("trim_extremes: refusing to drop more than 10% of the data");
  DataSet current = data;
  current.trimmed.clear();
  if (max_drop == 0) return current;

  // Preliminary fit on the interior only: the end windows of width max_drop
  // are exactly the dropping candidates, and leaving them in would let the
  // kinked family chase end clumps and wreck the residual ranking.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return data.x[a] < data.x[b]; });
  DataSet interior;
  for (int k = max_drop; k < n - max_drop; ++k) {
    interior.x.push_back(data.x[order[k]]);
    interior.y.push_back(data.y[order[k]]);
  }
  const FitModel preliminary = fit(interior);

  std::vector<double> res(n);
  for (int i = 0; i < n; ++i) res[i] = std::abs(data.y[i] - eval_model(preliminary, data.x[i]));
  std::vector<double> bulk;
  for (int k = max_drop; k < n - max_drop; ++k) bulk.push_back(res[order[k]]);
  std::nth_element(bulk.begin(), bulk.begin() + bulk.size() / 2, bulk.end());
  const double median = bulk[bulk.size() / 2];
  double yscale = 0.0;
  for (double y : data.y) yscale = std::max(yscale, std::abs(y));
  const double threshold = std::max(4.0 * median, 1e-8 * std::max(yscale, 1e-300));

  std::vector<int> original(n);
  std::iota(original.begin(), original.end(), 0);
  std::vector<double> live = res;

  for (int dropped = 0; dropped < max_drop; ++dropped) {
    const int m = current.size();
    int ilo = 0, ihi = 0;
    for (int i = 1; i < m; ++i) {
      if (current.x[i] < current.x[ilo]) ilo = i;
      if (current.x[i] > current.x[ihi]) ihi = i;
    }
    const int pick = (live[ilo] > live[ihi]) ? ilo
                     : (live[ihi] > live[ilo]) ? ihi
                                               : std::min(ilo, ihi);  // tie: smaller index
    if (live[pick] <= threshold) break;  // the ends look like the bulk

    current.trimmed.push_back(original[pick]);
    current.x.erase(current.x.begin() + pick);
    current.y.erase(current.y.begin() + pick);
    original.erase(original.begin() + pick);
    live.erase(live.begin() + pick);
  }
  std::sort(current.trimmed.begin(), current.trimmed.end());
  return current;
}

}  // namespace hpw
