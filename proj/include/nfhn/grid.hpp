#ifndef NFHN_GRID_HPP
#define NFHN_GRID_HPP

/*
 * Uniform spatial grids, sampled profiles with declared far-field values,
 * differentiation, and exponentially weighted norms.
 *
 * A grid stores N nodes xi_k = center - L + k h with h = 2L/N; node N/2
 * sits at the center.  Periodic grids identify xi_N with xi_0; truncated
 * grids extend profiles by their constant left/right values.
 */

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfhn/fft.hpp"

namespace nfhn {

struct WeightOverflow : std::runtime_error {
  explicit WeightOverflow(const std::string& w) : std::runtime_error(w) {}
};

enum class Boundary { Periodic, Truncated };

struct Grid {
  double center = 0.0;
  double half_length = 0.0;
  int n = 0;
  double h = 0.0;
  Boundary boundary = Boundary::Truncated;

  static Grid make(double half_length, int n, Boundary boundary,
                   double center = 0.0) {
    if (!(half_length > 0.0) || n < 8)
      throw std::invalid_argument("grid: need L > 0 and n >= 8");
    Grid g;
    g.center = center;
    g.half_length = half_length;
    g.n = n;
    g.h = 2.0 * half_length / n;
    g.boundary = boundary;
    return g;
  }

  double xi(int k) const { return center - half_length + k * h; }

  bool same_layout(const Grid& o) const {
    return n == o.n && boundary == o.boundary &&
           std::fabs(h - o.h) < 1e-15 * std::fabs(h) &&
           std::fabs(center - o.center) < 1e-12;
  }

  // Spectral wavenumbers for the periodic transform, FFT bin order.
  std::vector<double> frequencies() const {
    std::vector<double> ell(n);
    const double base = M_PI / half_length;
    for (int k = 0; k < n; ++k) {
      const int kk = (k <= n / 2) ? k : k - n;
      ell[k] = base * kk;
    }
    return ell;
  }
};

struct Profile {
  Grid grid;
  std::vector<double> y;
  double left = 0.0;    // value as xi -> -inf (truncated extension)
  double right = 0.0;   // value as xi -> +inf

  Profile() = default;
  explicit Profile(const Grid& g, double fill = 0.0)
      : grid(g), y(static_cast<size_t>(g.n), fill) {}

  double& operator[](int k) { return y[static_cast<size_t>(k)]; }
  double operator[](int k) const { return y[static_cast<size_t>(k)]; }
  int size() const { return grid.n; }
};

// First/last samples must have settled onto the declared constants before
// a truncated profile can be trusted near the boundary.
inline bool tails_consistent(const Profile& p, double tol) {
  if (p.grid.boundary == Boundary::Periodic) return true;
  return std::fabs(p.y.front() - p.left) <= tol &&
         std::fabs(p.y.back() - p.right) <= tol;
}

// Derivative: spectral on periodic grids, 4th-order central differences
// with one-sided closures on truncated grids.
inline Profile derivative(const Profile& p) {
  const Grid& g = p.grid;
  Profile out(g);
  if (g.boundary == Boundary::Periodic) {
    std::vector<std::complex<double>> a(g.n);
    for (int k = 0; k < g.n; ++k) a[k] = p[k];
    fft_forward(a);
    const auto ell = g.frequencies();
    for (int k = 0; k < g.n; ++k) a[k] *= std::complex<double>(0.0, ell[k]);
    if (g.n % 2 == 0) a[g.n / 2] = 0.0;   // drop the unmatched Nyquist mode
    fft_inverse(a);
    for (int k = 0; k < g.n; ++k) out[k] = a[k].real();
    return out;
  }
  const int n = g.n;
  const double d = 1.0 / (12.0 * g.h);
  for (int i = 2; i < n - 2; ++i)
    out[i] = (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) * d;
  out[0] = (-25.0 * p[0] + 48.0 * p[1] - 36.0 * p[2] + 16.0 * p[3] - 3.0 * p[4]) * d;
  out[1] = (-3.0 * p[0] - 10.0 * p[1] + 18.0 * p[2] - 6.0 * p[3] + p[4]) * d;
  out[n - 1] = (25.0 * p[n - 1] - 48.0 * p[n - 2] + 36.0 * p[n - 3] -
                16.0 * p[n - 4] + 3.0 * p[n - 5]) * d;
  out[n - 2] = (3.0 * p[n - 1] + 10.0 * p[n - 2] - 18.0 * p[n - 3] +
                6.0 * p[n - 4] - p[n - 5]) * d;
  return out;
}

namespace detail {

// Row-visitor twin of derivative() on truncated grids: reports the stencil
// entries row by row so solvers can assemble Jacobians that differentiate
// exactly the way the residual evaluation does.
inline void derivative_rows(const Grid& g,
                            const std::function<void(int, int, double)>& add) {
  const int n = g.n;
  const double d = 1.0 / (12.0 * g.h);
  static const double c0[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
  static const double c1[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};
  for (int q = 0; q < 5; ++q) {
    add(0, q, c0[q] * d);
    add(1, q, c1[q] * d);
    add(n - 1, n - 1 - q, -c0[q] * d);
    add(n - 2, n - 1 - q, -c1[q] * d);
  }
  for (int i = 2; i < n - 2; ++i) {
    add(i, i - 2, d);
    add(i, i - 1, -8.0 * d);
    add(i, i + 1, 8.0 * d);
    add(i, i + 2, -d);
  }
}

}

struct WeightSpec {
  double eta = 0.0;      // exponential rate of the weight
  double center = 0.0;   // weight is exp(eta |xi - center|)
};

enum class NormOrder { L2, H1 };

// Trapezoid quadrature of exp(2 eta |xi - c|) (u^2 [+ u'^2]).  The guard
// rejects rates whose weight overflows across the domain.
inline double weighted_norm(const Profile& p, const WeightSpec& w,
                            NormOrder order) {
  const Grid& g = p.grid;
  if (w.eta * g.half_length > 700.0 ||
      w.eta * (g.half_length + std::fabs(w.center - g.center)) > 700.0)
    throw WeightOverflow("weighted_norm: eta exceeds 700 / L");
  Profile dp;
  if (order == NormOrder::H1) dp = derivative(p);
  double s = 0.0;
  for (int k = 0; k < g.n; ++k) {
    double val = p[k] * p[k];
    if (order == NormOrder::H1) val += dp[k] * dp[k];
    double q = std::exp(2.0 * w.eta * std::fabs(g.xi(k) - w.center)) * val;
    if (g.boundary == Boundary::Truncated && (k == 0 || k == g.n - 1))
      q *= 0.5;
    s += q;
  }
  return std::sqrt(s * g.h);
}

}

#endif
