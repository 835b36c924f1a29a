// Command line driver: solve the coupled-channel radial problem at three
// step lengths, apply the two-term step-length correction, sample SDCS
// curves, fit them, and compare against user-supplied reference curves.
//
// Exit codes: 0 ok, 2 configuration, 3 metadata mismatch, 4 parse error,
// 1 anything else.

#include <CLI11.hpp>
#include <iostream>

#include "hpw/pipeline.hpp"
#include "hpw/version.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts, hpw::RunConfig& config) {
  cmd->add_option("--config", opts.config_path, "key=value config file (flat, [section] allowed)");
  cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set r0=300")
      ->take_all();
  cmd->add_option("-o,--outdir", config.outdir, "output directory");
}

hpw::RunConfig finalize(const CommonOpts& opts, const hpw::RunConfig& cli_defaults) {
  hpw::RunConfig config = cli_defaults;
  if (!opts.config_path.empty()) {
    config = hpw::load_config(opts.config_path);
    config.outdir = cli_defaults.outdir;  // command line wins for the outdir
  }
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw hpw::ConfigError("--set expects key=value, got '" + kv + "'");
    hpw::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

void print_fit(const hpw::FitOutput& fit) {
  for (const auto& w : fit.warnings) std::cerr << "hpw: warning: " << w << "\n";
  std::cout << "fit report: " << fit.report_path << "\n";
  std::cout << "fitted samples: " << fit.samples_path << "\n";
  if (const auto* lin = std::get_if<hpw::LinLinModel>(&fit.model)) {
    std::cout << "model linlin: a=" << lin->a << " b=" << lin->b << " c=" << lin->c
              << " d=" << lin->d << (lin->d_identifiable ? "" : " (d unidentifiable)") << "\n";
  } else {
    const auto& poly = std::get<hpw::PolyModel>(fit.model);
    std::cout << "model poly degree " << poly.degree() << ":";
    for (double c : poly.coeffs) std::cout << ' ' << c;
    std::cout << "\n";
  }
  std::cout << "residual norm: " << fit.residual << ", trimmed points: " << fit.trimmed.size()
            << "\n";
  if (fit.scale != 1.0 || fit.rms_after != 0.0) {
    std::cout << "reference scale: " << fit.scale << " (rms " << fit.rms_before << " -> "
              << fit.rms_after << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperspherical coupled-channel solver with step-length error correction"};
  app.set_version_flag("--version", hpw::version_string);
  app.require_subcommand(1);

  hpw::RunConfig defaults;

  // solve ------------------------------------------------------------------
  CommonOpts solve_opts;
  hpw::RunConfig solve_cfg;
  auto* solve = app.add_subcommand("solve", "produce T-matrix tables at the three step lengths");
  add_common(solve, solve_opts, solve_cfg);
  solve->add_option("--symmetry", solve_cfg.symmetry, "singlet, triplet or both");
  solve->add_option("--energy-ev", solve_cfg.energy_ev, "incident electron energy in eV");
  solve->add_option("--energy-ry", solve_cfg.energy_ry, "final-channel energy in Ry (overrides)");
  solve->add_option("--r0", solve_cfg.r0, "matching radius in a.u. (0 = recommended)");
  std::vector<double> steps;
  solve->add_option("--steps", steps, "three step lengths h1,h2,h3 in a.u.")->expected(3);

  // correct ----------------------------------------------------------------
  CommonOpts correct_opts;
  hpw::RunConfig correct_cfg;
  std::vector<std::string> table_paths;
  auto* correct = app.add_subcommand("correct",
                                     "two-term error correction from three table files");
  add_common(correct, correct_opts, correct_cfg);
  correct->add_option("tables", table_paths, "three tmatrix CSV files")->expected(3)->required();

  // fit --------------------------------------------------------------------
  CommonOpts fit_opts;
  hpw::RunConfig fit_cfg;
  std::string sdcs_path, model_kind = "linlin", axis = "energy", compare_path;
  int degree = 6, max_drop = 8;
  bool free_scale = false;
  auto* fit = app.add_subcommand("fit", "fit an SDCS curve with a model family");
  add_common(fit, fit_opts, fit_cfg);
  fit->add_option("sdcs", sdcs_path, "SDCS CSV file")->required();
  fit->add_option("--model", model_kind, "linlin (singlet) or poly (triplet)");
  fit->add_option("--degree", degree, "polynomial degree (poly model, <= 6)");
  fit->add_option("--trim", max_drop, "max points to drop from the extreme ends");
  fit->add_option("--axis", axis, "fit against 'energy' (Ry) or 'fraction'");
  fit->add_option("--compare", compare_path, "reference SDCS CSV to compare against");
  fit->add_flag("--free-scale", free_scale, "fit a single scale factor to the reference");

  // compare ----------------------------------------------------------------
  std::string cmp_ours, cmp_ref;
  bool cmp_free_scale = false;
  auto* compare = app.add_subcommand("compare", "overlay two SDCS curves");
  compare->add_option("sdcs", cmp_ours, "our SDCS CSV")->required();
  compare->add_option("reference", cmp_ref, "reference SDCS CSV")->required();
  compare->add_flag("--free-scale", cmp_free_scale, "fit a single scale factor");

  // all --------------------------------------------------------------------
  CommonOpts all_opts;
  hpw::RunConfig all_cfg;
  auto* all = app.add_subcommand("all", "solve + correct + fit in one go");
  add_common(all, all_opts, all_cfg);
  all->add_option("--symmetry", all_cfg.symmetry, "singlet, triplet or both");
  all->add_option("--energy-ev", all_cfg.energy_ev, "incident electron energy in eV");
  all->add_option("--energy-ry", all_cfg.energy_ry, "final-channel energy in Ry (overrides)");
  all->add_option("--r0", all_cfg.r0, "matching radius in a.u. (0 = recommended)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      if (steps.size() == 3) {
        solve_cfg.h1 = steps[0];
        solve_cfg.h2 = steps[1];
        solve_cfg.h3 = steps[2];
      }
      const auto config = finalize(solve_opts, solve_cfg);
      const auto written = hpw::run_solve(config);
      for (const auto& [sym, paths] : written)
        for (const auto& p : paths) std::cout << p << "\n";
    } else if (correct->parsed()) {
      const auto config = finalize(correct_opts, correct_cfg);
      const auto out = hpw::run_correct(table_paths, config);
      std::cout << out.corrected_path << "\n";
      for (const auto& p : out.sdcs_paths) std::cout << p << "\n";
    } else if (fit->parsed()) {
      const auto config = finalize(fit_opts, fit_cfg);
      print_fit(hpw::run_fit(sdcs_path, model_kind, degree, max_drop, axis, config, compare_path,
                             free_scale));
    } else if (compare->parsed()) {
      const hpw::SdcsCurve ours = hpw::csv::read_sdcs(cmp_ours);
      const hpw::SdcsCurve ref = hpw::csv::read_sdcs(cmp_ref);
      const double scale = cmp_free_scale ? hpw::fit_scale(ours, ref) : 1.0;
      double ss = 0.0;
      for (std::size_t i = 0; i < ours.values.size() && i < ref.values.size(); ++i) {
        const double d = scale * ours.values[i] - ref.values[i];
        ss += d * d;
      }
      std::cout << "scale=" << scale << " rms=" << std::sqrt(ss / ours.values.size()) << "\n";
    } else if (all->parsed()) {
      hpw::run_all(finalize(all_opts, all_cfg));
    }
  } catch (const hpw::ConfigError& e) {
    std::cerr << "hpw: config error: " << e.what() << "\n";
    return 2;
  } catch (const hpw::MetadataError& e) {
    std::cerr << "hpw: metadata error: " << e.what() << "\n";
    return 3;
  } catch (const hpw::CsvParseError& e) {
    std::cerr << "hpw: parse error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "hpw: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
