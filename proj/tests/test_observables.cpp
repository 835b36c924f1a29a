#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>
#include <random>

#include "hpw/observables.hpp"

using namespace hpw;

namespace {

AmplitudeVector amplitudes_of(const ChannelBasis& basis, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AmplitudeVector amp;
  amp.symmetry = basis.symmetry();
  amp.energy_ry = 2.0;
  amp.c.resize(basis.size());
  for (int i = 0; i < basis.size(); ++i) amp.c(i) = {u(rng), u(rng)};
  return amp;
}

}  // namespace

TEST_CASE("energy partition geometry") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uf(0.01, 0.99);
  for (int t = 0; t < 200; ++t) {
    const double f = uf(rng);
    const auto part = EnergyPartition::from_fraction(3.0, f);
    CHECK(std::tan(part.alpha0) * std::tan(part.alpha0) ==
          doctest::Approx(part.e_b_ry / (part.e_total_ry - part.e_b_ry)).epsilon(1e-12));
  }
  CHECK(EnergyPartition::from_fraction(2.0, 1.0).alpha0 == std::numbers::pi / 2);
  CHECK(EnergyPartition::from_fraction(2.0, 0.0).alpha0 == 0.0);
  CHECK(EnergyPartition::from_fraction(1.0, 0.5).momentum == doctest::Approx(1.0));
  CHECK(EnergyPartition::from_secondary_energy(2.0, 0.5).e_b_ry == doctest::Approx(0.5));
  CHECK_THROWS_AS(EnergyPartition::from_fraction(2.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(EnergyPartition::from_secondary_energy(2.0, 2.5), std::invalid_argument);
  CHECK_THROWS_AS(EnergyPartition::from_fraction(-1.0, 0.5), std::invalid_argument);
}

TEST_CASE("rank-one table structure") {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  std::mt19937 rng(7);
  auto amp = amplitudes_of(basis, rng);

  SUBCASE("unit vector gives a single entry") {
    amp.c.setZero();
    amp.c(0) = 1.0;
    const auto table = tmatrix_table(amp, basis, 0.01);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        CHECK(table.t(i, j) == std::complex<double>(i == 0 && j == 0 ? 1.0 : 0.0, 0.0));
  }

  SUBCASE("trace equals the amplitude norm and the table is Hermitian") {
    const auto table = tmatrix_table(amp, basis, 0.01);
    CHECK(table.t.trace().real() == doctest::Approx(amp.c.squaredNorm()).epsilon(1e-14));
    CHECK(std::abs(table.t.trace().imag()) < 1e-15);
    for (int i = 0; i < 6; ++i) {
      CHECK(table.t(i, i).imag() == 0.0);
      CHECK(table.t(i, i).real() >= 0.0);
      for (int j = 0; j < 6; ++j) CHECK(table.t(i, j) == std::conj(table.t(j, i)));
    }
  }

  SUBCASE("pair labels run 1..36 in row-major order") {
    const auto table = tmatrix_table(amp, basis, 0.01);
    CHECK(table.pair_label(0, 0) == 1);
    CHECK(table.pair_label(0, 5) == 6);
    CHECK(table.pair_label(5, 5) == 36);
  }

  SUBCASE("mismatched symmetry is rejected") {
    amp.symmetry = Symmetry::triplet;
    CHECK_THROWS_AS(tmatrix_table(amp, basis, 0.01), std::invalid_argument);
  }
}

TEST_CASE("quadratic form against the factorized route") {
  const auto basis = ChannelBasis::standard(Symmetry::triplet);
  std::mt19937 rng(11);
  const auto amp = amplitudes_of(basis, rng);
  const auto table = tmatrix_table(amp, basis, 0.009);
  for (double f : {0.1, 0.35, 0.5, 0.82}) {
    const auto part = EnergyPartition::from_fraction(2.0, f);
    std::complex<double> direct = 0.0;
    for (int n = 0; n < 6; ++n)
      direct += amp.c(n) * angular_harmonic(basis.degrees()[n], basis.symmetry(),
                                            AngularPoint(part.alpha0));
    const double want = std::norm(direct);
    CHECK(t_mod_squared(table, part) == doctest::Approx(want).epsilon(1e-12));
    CHECK(t_mod_squared(table, part) >= -1e-12);
  }
}

TEST_CASE("quadratic form parity in the energy fraction") {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  std::mt19937 rng(13);
  const auto table = tmatrix_table(amplitudes_of(basis, rng), basis, 0.0075);
  for (double f : {0.05, 0.2, 0.44}) {
    const double a = t_mod_squared(table, EnergyPartition::from_fraction(2.0, f));
    const double b = t_mod_squared(table, EnergyPartition::from_fraction(2.0, 1.0 - f));
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
}

TEST_CASE("zero table gives zero") {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  AmplitudeVector amp;
  amp.symmetry = Symmetry::singlet;
  amp.energy_ry = 2.0;
  amp.c = Eigen::VectorXcd::Zero(6);
  const auto table = tmatrix_table(amp, basis, 0.01);
  CHECK(t_mod_squared(table, EnergyPartition::from_fraction(2.0, 0.3)) == 0.0);
}

TEST_CASE("energy mismatch between table and partition is rejected") {
  const auto basis = ChannelBasis::standard(Symmetry::singlet);
  std::mt19937 rng(17);
  const auto table = tmatrix_table(amplitudes_of(basis, rng), basis, 0.01);
  CHECK_THROWS_AS(t_mod_squared(table, EnergyPartition::from_fraction(1.0, 0.3)),
                  std::invalid_argument);
}

TEST_CASE("sdcs sampling") {
  const auto basis = ChannelBasis::standard(Symmetry::triplet);
  std::mt19937 rng(19);
  const auto table = tmatrix_table(amplitudes_of(basis, rng), basis, 0.01);

  SUBCASE("curves are symmetric about one half") {
    const auto curve = sdcs_curve(table, 80, 1.0);
    REQUIRE(curve.fractions.size() == 80);
    CHECK(curve.fractions.front() == 0.0);
    CHECK(curve.fractions.back() == 1.0);
    for (int i = 0; i < 80; ++i) {
      const double a = curve.values[i], b = curve.values[79 - i];
      CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1e-300));
    }
  }

  SUBCASE("doubling the sample count reproduces shared nodes exactly") {
    const auto coarse = sdcs_curve(table, 80, 1.0);
    const auto fine = sdcs_curve(table, 159, 1.0);
    for (int i = 0; i < 80; ++i) {
      CHECK(fine.fractions[2 * i] == coarse.fractions[i]);
      CHECK(fine.values[2 * i] == coarse.values[i]);
    }
  }

  SUBCASE("kappa scales linearly and is recorded") {
    const auto base = sdcs_curve(table, 40, 1.0);
    const auto scaled = sdcs_curve(table, 40, 2.5);
    CHECK(scaled.kappa == 2.5);
    for (int i = 0; i < 40; ++i)
      CHECK(scaled.values[i] == doctest::Approx(2.5 * base.values[i]).epsilon(1e-15));
  }

  SUBCASE("too few samples are rejected") {
    CHECK_THROWS_AS(sdcs_curve(table, 1, 1.0), std::invalid_argument);
  }
}
