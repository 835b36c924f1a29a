#pragma once

#include <string>
#include <string_view>
#include <vector>

// Channel bookkeeping for the zero-angular-momentum hyperspherical expansion
// and the symmetrized hyperspherical harmonics that go with it.
//
// A channel is labeled by the Jacobi degree n; its effective angular quantum
// number is nu_n = 2n + 3/2.  The harmonic for channel n is
//
//   phi_n(alpha) = (1/2) (1 + (-1)^{s+n}) N_n P_n^{(1/2,1/2)}(cos 2 alpha) / (4 pi)
//
// with N_n fixed so that the set is orthonormal under the hyperangular
// measure sin^2(alpha) cos^2(alpha) d(alpha) (4 pi)^2.  The spherical-angle
// factor is the constant 1/(4 pi) because only s-waves survive.

namespace hpw {

// Total-spin symmetry: selects even (singlet) or odd (triplet) degrees.
enum class Symmetry : int { singlet = 0, triplet = 1 };

std::string to_string(Symmetry s);
Symmetry symmetry_from_string(std::string_view text);

// Hyperangle alpha = arctan(r2/r1), restricted to [0, pi/2].
struct AngularPoint {
  double alpha;
  explicit AngularPoint(double a);
};

// Ordered set of Jacobi degrees sharing one symmetry.  Every degree must
// satisfy (s + n) even, otherwise the symmetrization factor kills the
// harmonic and the channel would be empty.
class ChannelBasis {
 public:
  ChannelBasis(Symmetry s, std::vector<int> degrees);

  // {0,2,4,...} for singlet, {1,3,5,...} for triplet.
  static ChannelBasis standard(Symmetry s, int count = 6);

  Symmetry symmetry() const { return symmetry_; }
  const std::vector<int>& degrees() const { return degrees_; }
  int size() const { return static_cast<int>(degrees_.size()); }

  bool operator==(const ChannelBasis&) const = default;

 private:
  Symmetry symmetry_;
  std::vector<int> degrees_;
};

// nu_n = 2n + 3/2 (all orbital angular momenta vanish).
double nu_index(int n);

// Jacobi polynomial P_n^{(a,b)}(x) by forward three-term recurrence.
// Requires n >= 0, a > -1, b > -1.
double jacobi_polynomial(int n, double a, double b, double x);

// Normalization constant N_n of the channel harmonic.
double angular_norm(int n);

// Value of the symmetrized channel harmonic phi_n^s at alpha, including the
// 1/(4 pi) spherical factor.  Returns 0 when (s + n) is odd.
double angular_harmonic(int n, Symmetry s, AngularPoint p);

}  // namespace hpw
