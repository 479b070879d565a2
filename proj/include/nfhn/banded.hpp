#ifndef NFHN_BANDED_HPP
#define NFHN_BANDED_HPP

/*
 * Banded LU via LAPACK (dgbtrf/dgbtrs), column-major band storage with the
 * extra kl rows of fill-in space.  One factorization can back any number of
 * solves, including transposed ones.
 */

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <lapacke.h>

namespace nfhn {

class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
        ab_(static_cast<size_t>(ldab_) * n, 0.0), ipiv_(n) {}

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  void clear() {
    std::fill(ab_.begin(), ab_.end(), 0.0);
    factored_ = false;
  }

  // Entry (i, j); only positions within the declared band are storable.
  double& at(int i, int j) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_)
      throw std::out_of_range("banded entry (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") outside the band");
    return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }
  double get(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_)
      return 0.0;
    return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }

  void factor() {
    const lapack_int info =
        LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_,
                       ipiv_.data());
    if (info != 0)
      throw std::runtime_error("banded LU failed at pivot " +
                               std::to_string(info));
    factored_ = true;
  }
  bool factored() const { return factored_; }

  // Solve A x = b (or A^T x = b) in place using the stored factorization.
  void solve(std::vector<double>& b, bool transposed = false) const {
    if (!factored_)
      throw std::logic_error("banded solve before factorization");
    if (static_cast<int>(b.size()) != n_)
      throw std::invalid_argument("banded solve: rhs length mismatch");
    const lapack_int info = LAPACKE_dgbtrs(
        LAPACK_COL_MAJOR, transposed ? 'T' : 'N', n_, kl_, ku_, 1, ab_.data(),
        ldab_, ipiv_.data(), b.data(), n_);
    if (info != 0)
      throw std::runtime_error("banded back-substitution failed");
  }

 private:
  int n_, kl_, ku_, ldab_;
  std::vector<double> ab_;
  std::vector<lapack_int> ipiv_;
  bool factored_ = false;
};

}

#endif
