#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hpw/pipeline.hpp"

using namespace hpw;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("hpw_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Small, fast configuration used by the file-level tests.
RunConfig small_config(const std::string& outdir) {
  RunConfig config;
  config.symmetry = "singlet";
  config.energy_ry = 2.0;
  config.basis_size = 3;
  config.r0 = 30.0;
  config.h1 = 0.008;
  config.h2 = 0.009;
  config.h3 = 0.01;
  config.quad_order = 64;
  config.samples = 40;
  config.outdir = outdir;
  return config;
}

#ifdef HPW_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(HPW_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}
#endif

}  // namespace

TEST_CASE("energy bookkeeping follows the incident-energy convention") {
  RunConfig config;
  config.energy_ev = 27.2;
  CHECK(config.total_energy_ry() == doctest::Approx(1.0).epsilon(1e-12));
  config.energy_ev = 40.8;
  CHECK(config.total_energy_ry() == doctest::Approx(2.0).epsilon(1e-12));
  config.energy_ev = 54.4;
  CHECK(config.total_energy_ry() == doctest::Approx(3.0).epsilon(1e-12));
  config.energy_ry = 2.0;  // explicit final-channel energy wins
  CHECK(config.total_energy_ry() == 2.0);
}

TEST_CASE("config validation names the violated rule") {
  RunConfig config;
  config.h2 = config.h1;
  try {
    config.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("h1 < h2 < h3") != std::string::npos);
  }
  RunConfig bad;
  bad.symmetry = "sextet";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  RunConfig low;
  low.energy_ev = 10.0;  // below the binding energy
  CHECK_THROWS_AS(low.validate(), ConfigError);
}

TEST_CASE("config files parse, unknown keys are rejected") {
  const auto dir = temp_dir("config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# comment\n[run]\nsymmetry=triplet\nenergy_ry = 2\nh1=0.007\nh2 = 0.009\n"
        << "h3=0.011\nr0=40\nbasis_size=2\n";
  }
  const auto config = load_config((dir / "run.cfg").string());
  CHECK(config.symmetry == "triplet");
  CHECK(config.energy_ry == 2.0);
  CHECK(config.h1 == 0.007);
  CHECK(config.basis_size == 2);
  {
    std::ofstream out(dir / "bad.cfg");
    out << "stepp_length=1\n";
  }
  CHECK_THROWS_AS(load_config((dir / "bad.cfg").string()), ConfigError);
  RunConfig c;
  CHECK_THROWS_AS(apply_override(c, "taylor_order", "giant"), ConfigError);
}

TEST_CASE("solve writes tables, amplitudes and a replayable manifest") {
  const auto dir = temp_dir("solve");
  const auto config = small_config(dir.string());
  const auto written = run_solve(config);
  REQUIRE(written.count("singlet") == 1);
  REQUIRE(written.at("singlet").size() == 3);
  for (const auto& path : written.at("singlet")) CHECK(fs::exists(path));
  CHECK(fs::exists(dir / "manifest_singlet.txt"));

  // the manifest replays as a config and reproduces the table bytes
  const auto replay = load_config((dir / "manifest_singlet.txt").string());
  CHECK(replay.total_energy_ry() == config.total_energy_ry());
  CHECK(replay.h1 == config.h1);
  const auto dir2 = temp_dir("solve_replay");
  RunConfig replay_out = replay;
  replay_out.outdir = dir2.string();
  const auto rewritten = run_solve(replay_out);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(slurp(written.at("singlet")[i]) ==
          slurp(rewritten.at("singlet")[i]));
  }
}

TEST_CASE("solve is deterministic end to end") {
  const auto dir1 = temp_dir("det1");
  const auto dir2 = temp_dir("det2");
  auto c1 = small_config(dir1.string());
  auto c2 = small_config(dir2.string());
  const auto w1 = run_solve(c1);
  const auto w2 = run_solve(c2);
  const auto out1 = run_correct(w1.at("singlet"), c1);
  const auto out2 = run_correct(w2.at("singlet"), c2);
  CHECK(slurp(out1.corrected_path) == slurp(out2.corrected_path));
  for (std::size_t i = 0; i < out1.sdcs_paths.size(); ++i)
    CHECK(slurp(out1.sdcs_paths[i]) == slurp(out2.sdcs_paths[i]));
}

TEST_CASE("table files round trip through the CSV layer") {
  const auto dir = temp_dir("csvrt");
  const auto config = small_config(dir.string());
  const auto written = run_solve(config);
  csv::Metadata meta;
  const auto table = csv::read_tmatrix(written.at("singlet")[0], &meta);
  CHECK(table.basis.size() == 3);
  CHECK(table.energy_ry == 2.0);
  CHECK(table.h == 0.008);
  CHECK(meta.at("kind") == "tmatrix");
  CHECK((table.t - table.t.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("correct consumes solve output and produces symmetric curves") {
  const auto dir = temp_dir("correct");
  const auto config = small_config(dir.string());
  const auto written = run_solve(config);
  const auto out = run_correct(written.at("singlet"), config);
  CHECK(fs::exists(out.corrected_path));
  REQUIRE(out.sdcs_paths.size() == 4);  // three raw curves + corrected
  for (const auto& path : out.sdcs_paths) {
    const auto curve = csv::read_sdcs(path);
    REQUIRE(static_cast<int>(curve.fractions.size()) == config.samples);
    for (std::size_t i = 0; i < curve.fractions.size(); ++i) {
      const double a = curve.values[i];
      const double b = curve.values[curve.values.size() - 1 - i];
      CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1e-300));
    }
  }
}

TEST_CASE("correct rejects mismatched metadata") {
  const auto dir = temp_dir("correct_mismatch");
  auto config = small_config(dir.string());
  const auto paths = run_solve(config).at("singlet");
  auto other = config;
  other.energy_ry = 1.0;
  other.outdir = (dir / "other").string();
  const auto foreign = run_solve(other).at("singlet");
  CHECK_THROWS_AS(run_correct({paths[0], paths[1], foreign[2]}, config), MetadataError);
  CHECK_THROWS_AS(run_correct({paths[0], paths[1]}, config), MetadataError);
  CHECK_THROWS_AS(run_correct({paths[0], paths[0], paths[1]}, config), MetadataError);
}

TEST_CASE("malformed CSV reports the offending line") {
  const auto dir = temp_dir("parse");
  const fs::path bad = dir / "bad.csv";
  {
    std::ofstream out(bad);
    out << "# kind=sdcs\n# symmetry=singlet\n# energy_ry=2\n"
        << "fraction,value\n0,1\n0.5,oops\n";
  }
  try {
    csv::read_sdcs(bad.string());
    FAIL("expected CsvParseError");
  } catch (const CsvParseError& e) {
    CHECK(e.line == 6);
  }
}

TEST_CASE("fit pipeline recovers the generator and warns on the family mismatch") {
  const auto dir = temp_dir("fit");
  RunConfig config;
  config.outdir = dir.string();
  // synthesize a triplet-tagged SDCS curve from the kinked-linear family
  SdcsCurve curve;
  curve.symmetry = Symmetry::triplet;
  curve.energy_ry = 1.0;
  curve.provenance = "corrected";
  for (int i = 0; i < 80; ++i) {
    const double f = i / 79.0;
    curve.fractions.push_back(f);
    curve.values.push_back(0.0405 + 0.00567 * f + 0.20568 * std::abs(f - 0.25395));
  }
  const fs::path path = dir / "sdcs.csv";
  csv::write_sdcs(path.string(), curve, {});

  const auto fit = run_fit(path.string(), "linlin", 6, 0, "energy", config);
  REQUIRE(std::holds_alternative<LinLinModel>(fit.model));
  const auto& lin = std::get<LinLinModel>(fit.model);
  CHECK(lin.a == doctest::Approx(0.0405).epsilon(1e-6));
  CHECK(lin.d == doctest::Approx(0.25395).epsilon(1e-4));
  CHECK(fit.warnings.size() == 1);  // linlin is the singlet convention
  CHECK(fs::exists(fit.report_path));
  CHECK(fs::exists(fit.samples_path));
}

TEST_CASE("reference comparison fits a single scale factor") {
  const auto dir = temp_dir("compare");
  RunConfig config;
  config.outdir = dir.string();
  SdcsCurve ours;
  ours.symmetry = Symmetry::singlet;
  ours.energy_ry = 1.0;
  SdcsCurve ref = ours;
  for (int i = 0; i < 60; ++i) {
    const double f = i / 59.0;
    const double y = 1.0 + std::cos(2.0 * (f - 0.5));
    ours.fractions.push_back(f);
    ours.values.push_back(y);
    ref.fractions.push_back(f);
    ref.values.push_back(0.03 * y);
  }
  CHECK(fit_scale(ours, ref) == doctest::Approx(0.03).epsilon(1e-12));

  const fs::path a = dir / "ours.csv", b = dir / "ref.csv";
  csv::write_sdcs(a.string(), ours, {});
  csv::write_sdcs(b.string(), ref, {});
  const auto fit = run_fit(a.string(), "linlin", 6, 0, "energy", config, b.string(), true);
  CHECK(fit.scale == doctest::Approx(0.03).epsilon(1e-10));
  CHECK(fit.rms_after < fit.rms_before);
}

#ifdef HPW_CLI_PATH
TEST_CASE("command line exit codes") {
  const auto dir = temp_dir("cli");
  // config error: violated step triple
  CHECK(run_cli("solve --set h1=0.01 --set h2=0.01 -o " + (dir / "a").string()) == 2);
  // parse error: malformed CSV
  {
    std::ofstream out(dir / "broken.csv");
    out << "# kind=sdcs\nfraction,value\nzero,1\n";
  }
  CHECK(run_cli("fit " + (dir / "broken.csv").string() + " -o " + dir.string()) == 4);
  // metadata error: wrong file kind for correct
  SdcsCurve curve;
  curve.symmetry = Symmetry::singlet;
  curve.energy_ry = 1.0;
  curve.fractions = {0.0, 0.5, 1.0};
  curve.values = {1.0, 2.0, 1.0};
  csv::write_sdcs((dir / "curve.csv").string(), curve, {});
  const std::string c = (dir / "curve.csv").string();
  CHECK(run_cli("correct " + c + " " + c + " " + c + " -o " + dir.string()) == 3);
  CHECK(run_cli("--version") == 0);
}
#endif
