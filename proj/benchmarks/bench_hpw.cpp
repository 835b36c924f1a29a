#include <benchmark/benchmark.h>

#include <cmath>

#include "hpw/coupling.hpp"
#include "hpw/extrapolation.hpp"
#include "hpw/fd_engine.hpp"
#include "hpw/fitting.hpp"
#include "hpw/matcher.hpp"
#include "hpw/observables.hpp"
#include "hpw/propagator.hpp"

using namespace hpw;

namespace {

const double kMomentum = std::sqrt(2.0);

void BM_CouplingMatrix(benchmark::State& state) {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(coupling_matrix(basis, kMomentum, order));
  }
}
BENCHMARK(BM_CouplingMatrix)->Arg(64)->Arg(96)->Arg(128);

void BM_ChargeEigensystem(benchmark::State& state) {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  const auto coupling = coupling_matrix(basis, kMomentum, 96);
  for (auto _ : state) {
    benchmark::DoNotOptimize(charge_eigensystem(coupling));
  }
}
BENCHMARK(BM_ChargeEigensystem);

void BM_SeriesStart(benchmark::State& state) {
  const auto basis = ChannelBasis::standard(Symmetry::triplet);
  const auto coupling = coupling_matrix(basis, kMomentum, 96);
  for (auto _ : state) {
    benchmark::DoNotOptimize(series_start(basis, coupling, 12));
  }
}
BENCHMARK(BM_SeriesStart);

void BM_InnerSolve(benchmark::State& state) {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  const auto coupling = coupling_matrix(basis, kMomentum, 96);
  const auto grid = build_grid(0.01, 300.0, kMomentum);
  const auto series = series_start(basis, coupling, 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fd_inner_solve(grid, coupling, series));
  }
}
BENCHMARK(BM_InnerSolve);

void BM_TaylorSteps(benchmark::State& state) {
  // fixed 2000-step stretch of the outer region
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  const auto coupling = coupling_matrix(basis, kMomentum, 96);
  RadialGrid grid = build_grid(0.01, 300.0, kMomentum);
  const auto series = series_start(basis, coupling, 12);
  const auto inner = fd_inner_solve(grid, coupling, series);
  grid.outer_steps = 2000;
  for (auto _ : state) {
    SolutionSet sol = inner;
    taylor_outer_propagate(grid, coupling, sol, 10, 0);
    benchmark::DoNotOptimize(sol.value_end);
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_TaylorSteps);

void BM_ExtractAmplitudes(benchmark::State& state) {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  const auto coupling = coupling_matrix(basis, kMomentum, 96);
  const auto eig = charge_eigensystem(coupling);
  const auto grid = build_grid(0.01, 300.0, kMomentum);
  const auto series = series_start(basis, coupling, 12);
  SolutionSet sol = fd_inner_solve(grid, coupling, series);
  taylor_outer_propagate(grid, coupling, sol, 10, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_amplitudes(sol, eig, grid));
  }
}
BENCHMARK(BM_ExtractAmplitudes);

void BM_CorrectTable(benchmark::State& state) {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  Eigen::VectorXcd c(6);
  for (int i = 0; i < 6; ++i) c(i) = {0.1 * (i + 1), -0.05 * i};
  const Eigen::MatrixXcd base = c * c.adjoint();
  auto table = [&](double h) {
    return TMatrixTable{basis, 2.0, h, "h", base * (1.0 + std::pow(h / 0.005, 8) * 1e-3)};
  };
  const auto t1 = table(0.0075), t2 = table(0.009), t3 = table(0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(correct_table(t1, t2, t3));
  }
}
BENCHMARK(BM_CorrectTable);

void BM_SdcsCurve(benchmark::State& state) {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  Eigen::VectorXcd c(6);
  for (int i = 0; i < 6; ++i) c(i) = {0.1 * (i + 1), -0.05 * i};
  AmplitudeVector amp{c, Symmetry::singlet, 2.0};
  const auto table = tmatrix_table(amp, basis, 0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdcs_curve(table, 80, 1.0));
  }
}
BENCHMARK(BM_SdcsCurve);

void BM_FitLinLin(benchmark::State& state) {
  DataSet data;
  const LinLinModel gen{0.0405, 0.00567, 0.20568, 0.25395, true};
  for (int i = 0; i < 80; ++i) {
    const double x = i / 79.0;
    data.x.push_back(x);
    data.y.push_back(eval_model(FitModel(gen), x));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_linlin(data));
  }
}
BENCHMARK(BM_FitLinLin);

}  // namespace

BENCHMARK_MAIN();
