#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hpw/basis.hpp"
#include "hpw/coupling.hpp"

// Integration of the coupled radial system across its three regions:
// a Frobenius series about rho = 0, the seven-point finite-difference solve
// on [0, P*delta], and Taylor-series propagation with step 2*P*h out to
// the matching radius.

namespace hpw {

struct RadialGrid {
  double h = 0.01;        // inner step length in R (a.u.)
  double delta = 1.0;     // = 100 h
  double r0 = 300.0;      // requested matching radius
  double r0_actual = 0.0; // snapped up so the outer region is whole steps
  double momentum = 1.0;  // P (a.u.)
  double rho_far = 0.0;   // far radius (in rho) for the coefficient-space tail
  int inner_nodes = 101;  // nodes 0..100 on [0, P*delta]
  int outer_steps = 0;    // steps of 2*P*h on (P*delta, P*r0_actual]

  double inner_step() const { return momentum * h; }
  double outer_step() const { return 2.0 * momentum * h; }
  double rho_delta() const { return momentum * delta; }
  double rho_end() const { return momentum * r0_actual; }
  double inner_rho(int k) const { return k * inner_step(); }
};

// delta = 100 h; requires r0 > delta.  r0 is rounded up to the nearest outer
// node so the grid stays contiguous at P*delta.  tail_rho fixes the far
// radius of the coefficient-space tail integration (0 picks a default well
// outside every centrifugal tail).
RadialGrid build_grid(double h, double r0, double momentum, double tail_rho = 0.0);

// Matching-radius rule of thumb, > 5000 a.u. at 1 Ry and scaling as 1/sqrt(E).
double recommended_r0(double e_total_ry);

// Frobenius expansions of the N regular solutions about rho = 0.  Column c
// starts as rho^{nu_c + 1} in channel c.  Because the regular exponents of
// different channels differ by even integers, the recursion hits resonant
// orders where log(rho) companions are required; coefficients are therefore
// polynomials in log(rho).
class SeriesStart {
 public:
  SeriesStart(const ChannelBasis& basis, const CouplingMatrix& coupling, int order);

  int order() const { return order_; }
  int size() const { return channels_; }

  // F (channel x column) at rho; optionally the rho-derivative.
  void evaluate(double rho, Eigen::MatrixXd& value, Eigen::MatrixXd* derivative = nullptr) const;

  // Values on the first `fd_start_nodes` inner grid nodes, node-major.
  std::vector<Eigen::MatrixXd> node_values(const RadialGrid& grid) const;

 private:
  int channels_ = 0;
  int order_ = 0;
  std::vector<double> lead_power_;                    // nu_c + 1 per column
  std::vector<std::vector<Eigen::MatrixXd>> coeff_;   // [col][j] -> N x (log powers)
};

SeriesStart series_start(const ChannelBasis& basis, const CouplingMatrix& coupling,
                         int order = 12);

// N independent column solutions tabulated on the composite grid.  After
// outer-region restabilizations all stored nodes are expressed in the final
// column basis; any invertible column mixing is transparent to the
// amplitude extraction.
struct SolutionSet {
  std::vector<double> rho;              // stored nodes, ascending
  std::vector<Eigen::MatrixXd> values;  // per node: channel x column
  int inner_count = 0;                  // leading entries covering [0, P*delta]

  Eigen::MatrixXd deriv_delta;          // F' at P*delta
  Eigen::MatrixXd value_end;            // F  at P*r0_actual
  Eigen::MatrixXd deriv_end;            // F' at P*r0_actual
  double rho_delta = 0.0;
  double rho_max = 0.0;

  int stabilizations = 0;               // column re-orthonormalizations applied
  double end_condition = 0.0;           // cond of value_end (diagnostic, want < 1e12)
};

// Banded finite-difference solve on [0, P*delta] from the series start.
SolutionSet fd_inner_solve(const RadialGrid& grid, const CouplingMatrix& coupling,
                           const SeriesStart& series);

// Extends the inner solution to P*r0_actual by Taylor steps of size 2*P*h.
// store_stride thins the tabulation (<= 0 picks a stride automatically);
// the end values and derivatives are always exact.
void taylor_outer_propagate(const RadialGrid& grid, const CouplingMatrix& coupling,
                            SolutionSet& sol, int taylor_order = 10, int store_stride = 1);

// Max-abs residual of the centered discrete equation at inner node i for one
// column, relative to the column's local solution scale.
double inner_residual(const SolutionSet& sol, const CouplingMatrix& coupling,
                      const RadialGrid& grid, int node, int column);

// Convergence order of the inner scheme measured on the single-channel
// oracle problem F'' + (1 - 3.75/rho^2) F = 0 over [0.5, 1.5] (least-squares
// slope of log error against log h).
double measure_fd_order(const std::vector<double>& steps);

}  // namespace hpw
