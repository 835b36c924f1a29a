#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#if defined(__SIZEOF_FLOAT128__)
// Allow quad-precision instantiations (order studies); only the magnitude is
// ever needed beyond arithmetic.
namespace hpw::detail {
inline __float128 scalar_abs(__float128 x) { return x < 0 ? -x : x; }
}
#endif

// General banded linear solver in LAPACK band storage, with partial
// pivoting.  Entry (i, j) with j - ku <= i <= j + kl lives at
// ab[(kl + ku + i - j) + j * ldab]; the top kl rows of each column are the
// fill area used during elimination.

namespace hpw {

namespace detail {
template <class Real>
Real scalar_abs(Real x) {
  using std::abs;
  return abs(x);
}
}  // namespace detail

template <class Real>
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
        ab_(static_cast<std::size_t>(ldab_) * n, Real(0)), piv_(n, 0) {
    if (n < 1 || kl < 0 || ku < 0) throw std::invalid_argument("BandedMatrix: bad shape");
  }

  int size() const { return n_; }
  int lower_bandwidth() const { return kl_; }
  int upper_bandwidth() const { return ku_; }

  bool in_band(int i, int j) const {
    return i >= 0 && j >= 0 && i < n_ && j < n_ && i - j <= kl_ && j - i <= ku_;
  }

  Real& at(int i, int j) {
    if (!in_band(i, j)) throw std::out_of_range("BandedMatrix::at: outside band");
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }
  Real get(int i, int j) const {
    if (!in_band(i, j)) return Real(0);
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }

  void add(int i, int j, Real v) { at(i, j) += v; }

  // LU factorization with partial pivoting (unblocked gbtrf).  Returns false
  // when a zero pivot is met, leaving the matrix partially factored.
  bool factor() {
    const int kv = kl_ + ku_;  // effective upper bandwidth after pivoting
    factored_ = true;
    for (int j = 0; j < n_; ++j) {
      const int km = std::min(kl_, n_ - 1 - j);  // rows below the diagonal
      // Pivot search in column j, rows j..j+km.
      int p = 0;
      Real pmax = detail::scalar_abs(entry(kv, j));
      for (int k = 1; k <= km; ++k) {
        const Real a = detail::scalar_abs(entry(kv + k, j));
        if (a > pmax) {
          pmax = a;
          p = k;
        }
      }
      piv_[j] = j + p;
      if (pmax == Real(0)) return false;
      const int jend = std::min(j + kv, n_ - 1);  // last column touching row j
      if (p != 0) {
        for (int c = j; c <= jend; ++c) std::swap(entry(kv + p + j - c, c), entry(kv + j - c, c));
      }
      const Real pivot = entry(kv, j);
      for (int k = 1; k <= km; ++k) {
        const Real m = entry(kv + k, j) / pivot;
        entry(kv + k, j) = m;
        for (int c = j + 1; c <= jend; ++c) entry(kv + k + j - c, c) -= m * entry(kv + j - c, c);
      }
    }
    return true;
  }

  // Solves A x = b in place; factor() must have succeeded.
  void solve(Real* b) const {
    if (!factored_) throw std::logic_error("BandedMatrix::solve: factor() not called");
    const int kv = kl_ + ku_;
    for (int j = 0; j < n_; ++j) {
      if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
      const Real bj = b[j];
      const int km = std::min(kl_, n_ - 1 - j);
      for (int k = 1; k <= km; ++k) b[j + k] -= entry(kv + k, j) * bj;
    }
    for (int j = n_ - 1; j >= 0; --j) {
      Real sum = b[j];
      const int jend = std::min(n_ - 1, j + kv);
      for (int c = j + 1; c <= jend; ++c) sum -= entryc(j, c) * b[c];
      b[j] = sum / entryc(j, j);
    }
  }

  void solve(std::vector<Real>& b) const {
    if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("BandedMatrix::solve: size");
    solve(b.data());
  }

 private:
  Real& entry(int offset, int j) { return ab_[static_cast<std::size_t>(j) * ldab_ + offset]; }
  const Real& entry(int offset, int j) const {
    return ab_[static_cast<std::size_t>(j) * ldab_ + offset];
  }
  // Element (i, j) addressed row/column-wise inside the widened band.
  const Real& entryc(int i, int j) const {
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }

  int n_, kl_, ku_, ldab_;
  std::vector<Real> ab_;
  std::vector<int> piv_;
  bool factored_ = false;
};

}  // namespace hpw
