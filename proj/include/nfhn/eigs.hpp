#ifndef NFHN_EIGS_HPP
#define NFHN_EIGS_HPP

/*
 * Shift-invert Arnoldi with modified Gram-Schmidt and one unconditional
 * reorthogonalization pass.  The caller supplies the action of
 * (A - sigma I)^{-1}; Ritz values theta of that operator are mapped back to
 * eigenvalues sigma + 1/theta of A.  The start vector is a fixed
 * pseudo-random sequence, so results are bitwise reproducible.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace nfhn {

struct EigPair {
  std::complex<double> value;       // eigenvalue of A
  Eigen::VectorXcd vector;          // Ritz vector, unit 2-norm
  double op_residual = 0.0;         // Arnoldi residual for the inverted operator
};

struct ArnoldiOptions {
  int krylov = 80;
  double breakdown_tol = 1e-14;
};

using ShiftInvApply =
    std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

// Eigenpairs of A nearest the shift, ordered by distance to it.
inline std::vector<EigPair> shift_invert_arnoldi(int n,
                                                 const ShiftInvApply& apply,
                                                 double sigma,
                                                 const ArnoldiOptions& opt = {}) {
  const int m = std::min(opt.krylov, n);
  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);

  // deterministic start vector from a fixed linear congruential stream
  {
    uint64_t s = 0x2545F4914F6CDD1DULL;
    for (int i = 0; i < n; ++i) {
      s = s * 6364136223846793005ULL + 1442695040888963407ULL;
      V(i, 0) = static_cast<double>((s >> 11) & 0xFFFFFFFFULL) /
                    4294967295.0 - 0.5;
    }
    V.col(0) /= V.col(0).norm();
  }

  int steps = m;
  Eigen::VectorXd w(n);
  for (int j = 0; j < m; ++j) {
    apply(V.col(j), w);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const double hij = V.col(i).dot(w);
        H(i, j) += hij;
        w -= hij * V.col(i);
      }
    H(j + 1, j) = w.norm();
    if (H(j + 1, j) < opt.breakdown_tol) {
      steps = j + 1;
      break;
    }
    V.col(j + 1) = w / H(j + 1, j);
  }

  const Eigen::MatrixXd Hm = H.topLeftCorner(steps, steps);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Hm);
  const Eigen::VectorXcd theta = es.eigenvalues();
  const Eigen::MatrixXcd Y = es.eigenvectors();

  std::vector<int> order(static_cast<size_t>(steps));
  for (int i = 0; i < steps; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(theta(a)) > std::abs(theta(b));
  });

  std::vector<EigPair> out;
  out.reserve(order.size());
  const double h_last = H(steps, steps - 1);
  for (int idx : order) {
    EigPair p;
    p.value = sigma + 1.0 / theta(idx);
    Eigen::VectorXcd x = V.leftCols(steps).cast<std::complex<double>>() *
                         Y.col(idx);
    const double nx = x.norm();
    if (nx > 0.0) x /= nx;
    p.vector = std::move(x);
    p.op_residual =
        std::abs(h_last * Y(steps - 1, idx)) / std::max(std::abs(theta(idx)), 1e-300);
    out.push_back(std::move(p));
  }
  return out;
}

}

#endif
