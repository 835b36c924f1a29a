// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails.  Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "hpw/coupling.hpp"
#include "hpw/extrapolation.hpp"
#include "hpw/fd_engine.hpp"
#include "hpw/fitting.hpp"
#include "hpw/matcher.hpp"
#include "hpw/observables.hpp"
#include "hpw/pipeline.hpp"
#include "hpw/quadrature.hpp"
#include "oracles.hpp"

using namespace hpw;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%2d] %-34s %s  (%s)\n", id, name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  if (!pass) ++failures;
}

double now_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------- 1
void criterion_weights() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto w = extrapolation_weights(StepTriple(0.0075, 0.009, 0.01, 0.005), 8);
  // the historically quoted constants for steps (1.5, 1.8, 2.0)
  const double ref[4] = {0.05229064077, -0.023472188, -0.01143107936, 0.006630530581};
  // the same quadruple evaluated in exact rational arithmetic (the quoted
  // values deviate from these by ~2.5e-7, consistent with single-precision
  // provenance; see the project notes)
  const double exact[4] = {0.05229063055748258, -0.023472194447101125,
                           -0.011431077422354458, 0.006630532234159508};
  const double got[4] = {w.a21, w.a32, w.b21, w.b32};
  double worst = 0.0, worst_exact = 0.0;
  for (int i = 0; i < 4; ++i) {
    worst = std::max(worst, std::abs(got[i] / ref[i] - 1.0));
    worst_exact = std::max(worst_exact, std::abs(got[i] / exact[i] - 1.0));
  }
  const double ms = now_ms(t0);
  report(1, "reference weight quadruple", worst <= 1e-8 && ms < 1000.0,
         "quoted-constant rel err " + fmt(worst) + " (bound 1e-8 unattainable: the quoted "
         "constants are self-inconsistent at ~2.5e-7); exact-arithmetic rel err " +
             fmt(worst_exact) + ", " + fmt(ms) + " ms");
}

// ---------------------------------------------------------------------- 2
void criterion_two_term_exactness() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const StepTriple steps;  // (0.0075, 0.009, 0.01), unit 0.005
  const StepTriple plain(0.0075, 0.009, 0.01, 1.0);
  double worst_c0 = 0.0, worst_unit = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::complex<double> c0(u(rng) + 2.0 * (u(rng) > 0 ? 1 : -1), u(rng));
    const std::complex<double> c1(u(rng), u(rng)), c2(u(rng), u(rng));
    // error terms of order one in the nondimensional step, so the unit
    // round trip is exercised well above rounding
    auto model = [&](double h) {
      const double x = h / 0.005;
      return c0 + c1 * std::pow(x, 8) + c2 * std::pow(x, 10);
    };
    const auto ra = two_term_correct(model(0.0075), model(0.009), model(0.01), steps);
    const auto rb = two_term_correct(model(0.0075), model(0.009), model(0.01), plain);
    worst_c0 = std::max(worst_c0, std::abs(ra.t_star - c0) / std::abs(c0));
    worst_unit = std::max(worst_unit, std::abs(ra.t_star - rb.t_star) / std::abs(ra.t_star));
  }
  report(2, "two-term exactness + unit choice", worst_c0 <= 1e-10 && worst_unit <= 1e-12,
         "c0 rel " + fmt(worst_c0) + ", unit rel " + fmt(worst_unit));
}

// ---------------------------------------------------------------------- 3
void criterion_orthonormality() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rule = gauss_legendre(96, 0.0, std::numbers::pi / 2);
  const double fourpi2 = std::pow(4.0 * std::numbers::pi, 2);
  double worst = 0.0;
  for (auto sym : {Symmetry::singlet, Symmetry::triplet}) {
    const auto basis = ChannelBasis::standard(sym);
    for (int i = 0; i < basis.size(); ++i)
      for (int j = 0; j < basis.size(); ++j) {
        const double g = fourpi2 * rule.integrate([&](double a) {
          const AngularPoint p(a);
          const double s = std::sin(a), c = std::cos(a);
          return angular_harmonic(basis.degrees()[i], sym, p) *
                 angular_harmonic(basis.degrees()[j], sym, p) * s * s * c * c;
        });
        worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
      }
  }
  const double ms = now_ms(t0);
  report(3, "basis orthonormality", worst < 1e-10 && ms < 1000.0,
         "worst Gram dev " + fmt(worst) + ", " + fmt(ms) + " ms");
}

// ---------------------------------------------------------------------- 4
void criterion_coupling() {
  double worst_sym = 0.0, worst_scale = 0.0, worst_quad = 0.0;
  for (auto sym : {Symmetry::singlet, Symmetry::triplet}) {
    const auto basis = ChannelBasis::standard(sym);
    const auto m64 = coupling_matrix(basis, 1.0, 64);
    const auto m96 = coupling_matrix(basis, 1.0, 96);
    const auto m128 = coupling_matrix(basis, 1.0, 128);
    const auto m96p = coupling_matrix(basis, 2.0, 96);
    worst_sym = std::max(worst_sym,
                         (m96.values - m96.values.transpose()).cwiseAbs().maxCoeff());
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        worst_scale = std::max(worst_scale, std::abs(m96p.values(i, j) /
                                                         (0.5 * m96.values(i, j)) -
                                                     1.0));
    worst_quad = std::max(worst_quad, (m64.values - m128.values).cwiseAbs().maxCoeff());
  }
  report(4, "coupling matrix invariants",
         worst_sym <= 1e-12 && worst_scale <= 1e-15 && worst_quad <= 1e-11,
         "sym " + fmt(worst_sym) + ", scale rel " + fmt(worst_scale) + ", quad " +
             fmt(worst_quad));
}

// ---------------------------------------------------------------------- 5

#if defined(__SIZEOF_FLOAT128__)
double bessel_error_quad(double h) {
  using F128 = __float128;
  WEval<F128> w = [](F128 rho, F128* out) { *out = F128(3.75) / (rho * rho) - F128(1); };
  const int nodes = static_cast<int>(std::lround(1.0 / h)) + 1;
  std::vector<F128> start(fd_start_nodes);
  for (int k = 0; k < fd_start_nodes; ++k)
    start[k] = oracles::bessel_oracle_quad(F128(0.5) + F128(k) * F128(h));
  const auto fd = fd_solve<F128>(F128(0.5), F128(h), nodes, 1, 1, w, start);
  F128 err = 0;
  for (int k = 0; k < nodes; ++k) {
    F128 e = fd.at(k, 0, 0) - oracles::bessel_oracle_quad(F128(0.5) + F128(k) * F128(h));
    if (e < 0) e = -e;
    if (e > err) err = e;
  }
  return static_cast<double>(err);
}
#endif

void criterion_inner_order() {
  const auto t0 = std::chrono::steady_clock::now();
  // double-precision error bound at the production step length
  WEval<double> w = [](double rho, double* out) { *out = 3.75 / (rho * rho) - 1.0; };
  const double h = 0.0075;
  const int nodes = static_cast<int>(std::lround(1.0 / h)) + 1;
  std::vector<double> start(fd_start_nodes);
  for (int k = 0; k < fd_start_nodes; ++k) start[k] = oracles::bessel_oracle(0.5 + k * h);
  const auto fd = fd_solve<double>(0.5, h, nodes, 1, 1, w, start);
  double err = 0.0;
  for (int k = 0; k < nodes; ++k)
    err = std::max(err, std::abs(fd.at(k, 0, 0) - oracles::bessel_oracle(0.5 + k * h)));

#if defined(__SIZEOF_FLOAT128__)
  // the truncation error sits below the double rounding floor at these
  // steps, so the slope is measured in quad precision
  const double e1 = bessel_error_quad(0.02);
  const double e2 = bessel_error_quad(0.01);
  const double e3 = bessel_error_quad(0.005);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double lh[3] = {std::log(0.02), std::log(0.01), std::log(0.005)};
  const double le[3] = {std::log(e1), std::log(e2), std::log(e3)};
  for (int i = 0; i < 3; ++i) {
    sx += lh[i];
    sy += le[i];
    sxx += lh[i] * lh[i];
    sxy += lh[i] * le[i];
  }
  const double order = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
#else
  const double order = 0.0;
#endif
  const double ms = now_ms(t0);
  report(5, "inner-solver order (Bessel)", order >= 6.0 && err < 1e-9 && ms < 10000.0,
         "order " + fmt(order) + ", err(h=0.0075) " + fmt(err) + ", " + fmt(ms) + " ms");
}

// ---------------------------------------------------------------------- 6
void criterion_outer_oracle() {
  const ChannelBasis one(Symmetry::singlet, {0});
  const auto coupling = coupling_matrix(one, 1.0, 96);
  const double q = coupling.values(0, 0);
  RadialGrid grid;
  grid.h = 0.01;  // outer step 2h = 0.02
  grid.momentum = 1.0;
  const double rho0 = 1.0, rho1 = 500.0;
  grid.outer_steps = static_cast<int>(std::lround((rho1 - rho0) / 0.02));
  SolutionSet sol;
  sol.inner_count = 1;
  sol.rho = {rho0};
  sol.values = {Eigen::MatrixXd::Constant(1, 1, 0.2)};
  sol.deriv_delta = Eigen::MatrixXd::Constant(1, 1, 0.6);
  sol.rho_delta = rho0;
  sol.rho_max = rho0;
  taylor_outer_propagate(grid, coupling, sol, 10, 0);
  auto w = [q](double rho) { return 3.75 / (rho * rho) - 1.0 - 2.0 * q / rho; };
  const auto oracle = oracles::integrate_second_order(w, rho0, 0.2, 0.6, rho1, 1e-12);
  const double dv = std::abs(sol.value_end(0, 0) - oracle.y);
  const double dd = std::abs(sol.deriv_end(0, 0) - oracle.yp);
  report(6, "outer propagation vs oracle", dv <= 1e-8 && dd <= 1e-8,
         "dF " + fmt(dv) + ", dF' " + fmt(dd) + " at rho=500");
}

// ------------------------------------------------------------------- 7, 10
RunConfig desk_config(const std::string& outdir, const std::string& symmetry) {
  RunConfig config;
  config.symmetry = symmetry;
  config.energy_ry = 2.0;
  config.r0 = 300.0;
  config.outdir = outdir;
  config.store_stride = 0;
  return config;
}

void criterion_sdcs_symmetry() {
  const fs::path dir = fs::temp_directory_path() / "hpw_acceptance_desk";
  fs::remove_all(dir);
  double worst = 0.0;
  int curves = 0;
  for (const char* sym : {"singlet", "triplet"}) {
    auto config = desk_config((dir / sym).string(), sym);
    const auto tables = run_solve(config);
    const auto out = run_correct(tables.at(sym), config);
    for (const auto& path : out.sdcs_paths) {
      const auto curve = csv::read_sdcs(path);
      ++curves;
      for (std::size_t i = 0; i < curve.values.size(); ++i) {
        const double a = curve.values[i];
        const double b = curve.values[curve.values.size() - 1 - i];
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
      }
    }
  }
  report(7, "SDCS symmetry about E/2", worst <= 1e-10 && curves == 8,
         std::to_string(curves) + " curves, worst rel asym " + fmt(worst));
}

// ---------------------------------------------------------------------- 8
void criterion_matcher_stability() {
  double worst = 0.0;
  for (auto sym : {Symmetry::singlet, Symmetry::triplet}) {
    Eigen::VectorXcd c[2];
    int slot = 0;
    for (double r0 : {300.0, 330.0}) {
      const double momentum = std::sqrt(2.0);
      const auto basis = ChannelBasis::standard(sym);
      const auto coupling = coupling_matrix(basis, momentum, 96);
      const auto eig = charge_eigensystem(coupling);
      const auto grid = build_grid(0.01, r0, momentum);
      const auto series = series_start(basis, coupling, 12);
      auto sol = fd_inner_solve(grid, coupling, series);
      taylor_outer_propagate(grid, coupling, sol, 10, 0);
      c[slot++] = extract_amplitudes(sol, eig, grid).c;
    }
    for (int i = 0; i < 6; ++i)
      worst = std::max(worst,
                       std::abs(std::abs(c[1](i)) - std::abs(c[0](i))) / std::abs(c[0](i)));
  }

  // free-channel limit: no coupling -> amplitudes exactly one
  const auto basis = ChannelBasis::standard(Symmetry::singlet, 4);
  const ChargeEigensystem eig{basis, Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4)};
  const double rho = 500.0;
  Eigen::MatrixXd value = Eigen::MatrixXd::Zero(4, 4), deriv = Eigen::MatrixXd::Zero(4, 4);
  for (int k = 0; k < 4; ++k) {
    value(k, k) = (0.5 + 0.3 * k) * std::sin(rho + 0.4 * k);
    deriv(k, k) = (0.5 + 0.3 * k) * std::cos(rho + 0.4 * k);
  }
  SolutionSet sol;
  sol.rho_max = rho;
  sol.value_end = value;
  sol.deriv_end = deriv;
  RadialGrid grid;
  grid.momentum = 1.0;
  grid.rho_far = rho;
  const auto amp = extract_amplitudes(sol, eig, grid);
  double free_dev = 0.0;
  for (int k = 0; k < 4; ++k)
    free_dev = std::max(free_dev, std::abs(amp.c(k) - std::complex<double>(1.0, 0.0)));

  report(8, "matcher stability (R0 300->330)", worst <= 1e-3 && free_dev <= 1e-12,
         "worst |C| drift " + fmt(worst) + ", free-limit dev " + fmt(free_dev));
}

// ---------------------------------------------------------------------- 9
void criterion_fitting() {
  bool pass = true;
  std::string detail;

  const std::vector<std::pair<double, std::vector<double>>> poly_rows = {
      {1.0, {0.042012, -0.650385, 3.8148108, -10.0556766, 10.054884}},
      {2.0, {0.046054, -0.49753, 2.90446, -9.505798, 16.482738, -14.075808, 4.691936}},
      {3.0, {0.0563445, -0.420831, 1.529658, -3.071799, 3.3675705, -1.874718, 0.416538}},
  };
  double worst_poly = 0.0;
  for (const auto& [e, coeffs] : poly_rows) {
    DataSet data;
    const PolyModel gen{coeffs};
    for (int i = 0; i < 80; ++i) {
      const double x = e * i / 79.0;
      data.x.push_back(x);
      data.y.push_back(eval_model(gen, x));
    }
    const auto fit = fit_poly(data, static_cast<int>(coeffs.size()) - 1);
    for (std::size_t k = 0; k < coeffs.size(); ++k)
      worst_poly = std::max(worst_poly, std::abs(fit.coeffs[k] / coeffs[k] - 1.0));
  }
  pass = pass && worst_poly <= 1e-6;

  const std::vector<std::array<double, 5>> lin_rows = {
      {1.0, 0.0405, 0.00567, 0.20568, 0.25395},
      {2.0, 0.018326, 0.001411, 0.049555, 0.864263},
      {3.0, 0.00373, -0.000005, 0.00694, 0.74947},
  };
  double worst_lin = 0.0, worst_kink = 0.0;
  for (const auto& row : lin_rows) {
    DataSet data;
    const LinLinModel gen{row[1], row[2], row[3], row[4], true};
    for (int i = 0; i < 80; ++i) {
      const double x = row[0] * i / 79.0;
      data.x.push_back(x);
      data.y.push_back(eval_model(gen, x));
    }
    const auto fit = fit_linlin(data);
    worst_lin = std::max({worst_lin, std::abs(fit.a / row[1] - 1.0),
                          std::abs(fit.b / row[2] - 1.0), std::abs(fit.c / row[3] - 1.0)});
    worst_kink = std::max(worst_kink, std::abs(fit.d / row[4] - 1.0));
  }
  pass = pass && worst_lin <= 1e-6 && worst_kink <= 1e-4;

  const PolyModel quartic{poly_rows[0].second};
  const bool eval_ok =
      eval_model(quartic, 0.0) == poly_rows[0].second[0] &&
      std::abs(eval_model(quartic, 0.5) - 0.041992875) <= 1e-12 &&
      std::abs(eval_model(LinLinModel{0.0405, 0.00567, 0.20568, 0.25395, true}, 0.0) -
               (0.0405 + 0.20568 * 0.25395)) <= 1e-15;
  pass = pass && eval_ok;

  report(9, "fitting round trips", pass,
         "poly rel " + fmt(worst_poly) + ", lin rel " + fmt(worst_lin) + ", kink rel " +
             fmt(worst_kink) + (eval_ok ? ", eval ok" : ", eval FAILED"));
}

// --------------------------------------------------------------------- 10
std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void criterion_reproducibility() {
  const fs::path base = fs::temp_directory_path() / "hpw_acceptance_repro";
  fs::remove_all(base);
  bool identical = true;
  std::vector<std::string> first;
  for (int round = 0; round < 2; ++round) {
    auto config = desk_config((base / std::to_string(round)).string(), "singlet");
    const auto tables = run_solve(config);
    const auto out = run_correct(tables.at("singlet"), config);
    std::vector<std::string> bytes;
    for (const auto& p : tables.at("singlet")) bytes.push_back(slurp(p));
    bytes.push_back(slurp(out.corrected_path));
    for (const auto& p : out.sdcs_paths) bytes.push_back(slurp(p));
    if (round == 0) {
      first = bytes;
    } else {
      identical = (bytes == first);
    }
  }
  report(10, "reproducibility statement", identical,
         identical ? "repeated runs byte-identical" : "repeated runs differ");
  std::printf(
      "     note: absolute SDCS magnitudes carry this implementation's documented\n"
      "     normalization convention (kappa and the amplitude gauge recorded in the\n"
      "     run manifest); published absolute scales and external benchmark tables\n"
      "     are not reproduced here.  Shape, symmetry, extrapolation-algebra and\n"
      "     oracle-based checks above stand in; reference curves can be overlaid\n"
      "     with `hpw compare` (optionally with a single fitted scale factor).\n");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_weights();
  criterion_two_term_exactness();
  criterion_orthonormality();
  criterion_coupling();
  criterion_inner_order();
  criterion_outer_oracle();
  criterion_sdcs_symmetry();
  criterion_matcher_stability();
  criterion_fitting();
  criterion_reproducibility();
  if (failures > 0) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
