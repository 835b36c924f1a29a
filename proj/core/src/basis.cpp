#include "hpw/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hpw {

std::string to_string(Symmetry s) {
  return s == Symmetry::singlet ? "singlet" : "triplet";
}

Symmetry symmetry_from_string(std::string_view text) {
  if (text == "singlet" || text == "0") return Symmetry::singlet;
  if (text == "triplet" || text == "1") return Symmetry::triplet;
  throw std::invalid_argument("unknown symmetry '" + std::string(text) +
                              "' (expected singlet or triplet)");
}

AngularPoint::AngularPoint(double a) : alpha(a) {
  if (!(a >= 0.0 && a <= std::numbers::pi / 2)) {
    throw std::domain_error("AngularPoint: alpha must lie in [0, pi/2]");
  }
}

ChannelBasis::ChannelBasis(Symmetry s, std::vector<int> degrees)
    : symmetry_(s), degrees_(std::move(degrees)) {
  if (degrees_.empty()) throw std::invalid_argument("ChannelBasis: empty degree set");
  int prev = -1;
  for (int n : degrees_) {
    if (n < 0) throw std::invalid_argument("ChannelBasis: degree must be >= 0");
    if (n <= prev) throw std::invalid_argument("ChannelBasis: degrees must be strictly increasing");
    if ((n + static_cast<int>(s)) % 2 != 0) {
      throw std::invalid_argument("ChannelBasis: (s + n) must be even, degree " +
                                  std::to_string(n) + " is not allowed for " + to_string(s));
    }
    prev = n;
  }
}

ChannelBasis ChannelBasis::standard(Symmetry s, int count) {
  if (count < 1) throw std::invalid_argument("ChannelBasis: count must be >= 1");
  std::vector<int> degrees(count);
  const int first = (s == Symmetry::singlet) ? 0 : 1;
  for (int i = 0; i < count; ++i) degrees[i] = first + 2 * i;
  return ChannelBasis(s, std::move(degrees));
}

double nu_index(int n) {
  if (n < 0) throw std::invalid_argument("nu_index: n must be >= 0");
  return 2.0 * n + 1.5;
}

double jacobi_polynomial(int n, double a, double b, double x) {
  if (n < 0) throw std::invalid_argument("jacobi_polynomial: n must be >= 0");
  if (a <= -1.0 || b <= -1.0)
    throw std::invalid_argument("jacobi_polynomial: parameters must be > -1");
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = 0.5 * (a - b + (a + b + 2.0) * x);
  for (int k = 2; k <= n; ++k) {
    const double c = 2.0 * k + a + b;
    const double a1 = 2.0 * k * (k + a + b) * (c - 2.0);
    const double a2 = (c - 1.0) * (a * a - b * b);
    const double a3 = (c - 2.0) * (c - 1.0) * c;
    const double a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c;
    const double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double angular_norm(int n) {
  if (n < 0) throw std::invalid_argument("angular_norm: n must be >= 0");
  // Squared norm of P_n^{(1/2,1/2)} under sin^2 cos^2 d(alpha) is h_n / 8 with
  //   h_n = 2 Gamma(n+3/2)^2 / ((n+1) (n+1)! n!).
  const double log_h = std::numbers::ln2 + 2.0 * std::lgamma(n + 1.5) -
                       std::log(n + 1.0) - std::lgamma(n + 2.0) - std::lgamma(n + 1.0);
  return std::exp(0.5 * (std::log(8.0) - log_h));
}

double angular_harmonic(int n, Symmetry s, AngularPoint p) {
  if (n < 0) throw std::invalid_argument("angular_harmonic: n must be >= 0");
  if ((n + static_cast<int>(s)) % 2 != 0) return 0.0;  // symmetrization factor vanishes
  const double x = std::cos(2.0 * p.alpha);
  const double y00 = 1.0 / (4.0 * std::numbers::pi);
  return angular_norm(n) * jacobi_polynomial(n, 0.5, 0.5, x) * y00;
}

}  // namespace hpw
