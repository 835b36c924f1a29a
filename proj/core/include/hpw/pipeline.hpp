#pragma once

#include <map>
#include <string>
#include <vector>

#include "hpw/csv.hpp"
#include "hpw/extrapolation.hpp"
#include "hpw/fitting.hpp"
#include "hpw/matcher.hpp"
#include "hpw/observables.hpp"

// End-to-end orchestration shared by the command line tool and the test
// suites: solve at three step lengths, apply the two-term correction, sample
// SDCS curves, fit, and export plot-ready CSV files plus a run manifest.

namespace hpw {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string symmetry = "singlet";  // singlet | triplet | both
  double energy_ev = 27.2;           // incident electron energy (eV)
  double energy_ry = 0.0;            // final-channel energy; 0 -> derived from energy_ev
  double h1 = 0.0075, h2 = 0.009, h3 = 0.01;  // step lengths (a.u.)
  double r0 = 0.0;                   // matching radius; 0 -> recommended_r0(E)
  int basis_size = 6;
  int quad_order = 96;
  int taylor_order = 10;
  int series_order = 12;
  double kappa = 1.0;                // SDCS normalization convention
  double unit = 0.005;               // extrapolation length unit (a.u.)
  int exponent = 8;                  // leading error exponent p (model uses p, p+2)
  int samples = 80;                  // SDCS samples per curve
  int store_stride = 0;              // outer tabulation thinning; 0 -> auto
  double tail_rho = 0.0;             // far radius of the coefficient-space tail; 0 -> auto
  std::string outdir = "out";
  bool checkpoint = false;           // export boundary values of each solution set
  bool dump_coupling = false;        // export the coupling matrix as CSV

  double total_energy_ry() const;    // energy_ry if set, else energy_ev/13.6 - 1
  double matching_radius() const;    // r0 if set, else recommended_r0
  std::vector<Symmetry> symmetries() const;
  void validate() const;             // throws ConfigError naming the violated rule
};

// Flat key=value files with optional [section] headers; keys inside a
// [result] section are ignored, so a run manifest replays as a config.
RunConfig load_config(const std::string& path);
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

struct SolveOutput {
  TMatrixTable table;
  AmplitudeVector amplitudes;
  double r0_actual = 0.0;
  int stabilizations = 0;
  double end_condition = 0.0;
  double runtime_ms = 0.0;
  std::string checkpoint;  // boundary-value CSV body when requested
};

// One (symmetry, step length) run through basis -> coupling -> propagation
// -> matching -> table.
SolveOutput solve_single(const RunConfig& config, Symmetry symmetry, double h);

// Writes per-step tables (plus optional extras) and the run manifest for
// every configured symmetry; the three step lengths run concurrently.
// Returns the written table paths, grouped per symmetry in h order.
std::map<std::string, std::vector<std::string>> run_solve(const RunConfig& config);

struct CorrectOutput {
  std::string corrected_path;
  std::vector<std::string> sdcs_paths;  // three raw curves + the corrected one
};

// Consumes three table files sharing metadata; exit-code-3 class errors are
// reported as MetadataError.
CorrectOutput run_correct(const std::vector<std::string>& table_paths, const RunConfig& config);

struct FitOutput {
  FitModel model;
  double residual = 0.0;
  std::vector<int> trimmed;
  std::string report_path;
  std::string samples_path;
  double scale = 1.0;      // fitted scale against a reference curve (if any)
  double rms_before = 0.0;
  double rms_after = 0.0;
  std::vector<std::string> warnings;
};

FitOutput run_fit(const std::string& sdcs_path, const std::string& model_kind, int degree,
                  int max_drop, const std::string& axis, const RunConfig& config,
                  const std::string& compare_path = {}, bool free_scale = false);

// Least-squares scale s minimizing |s * ours - ref| on the shared fraction
// grid (reference interpolated linearly).
double fit_scale(const SdcsCurve& ours, const SdcsCurve& ref);

// solve + correct + fit for every configured symmetry.
void run_all(const RunConfig& config);

}  // namespace hpw
