#ifndef NFHN_CONVOLUTION_HPP
#define NFHN_CONVOLUTION_HPP

/*
 * Discretized convolution K * u on uniform grids.
 *
 * The continuous kernel part becomes a band of product-integration weights:
 * on every grid cell the profile factor is interpolated by a six-point
 * quintic Lagrange stencil and the kernel factor is integrated exactly by
 * 12-point Gauss-Legendre quadrature, with cells split at kernel kinks.
 * Mass escaping the band couples to the declared far-field constants, and
 * the whole weight set is renormalized to the exact kernel mass so that
 * constants are reproduced to rounding.
 *
 * Atoms act as exact translations: by a spectral phase on periodic grids,
 * and on truncated grids by splitting off an analytic reference step and
 * phase-shifting the decaying remainder on a zero-padded transform.
 *
 * Both an FFT evaluation path and a direct banded-summation path are
 * provided; they use identical weights and serve as each other's oracle.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfhn/fft.hpp"
#include "nfhn/grid.hpp"
#include "nfhn/kernel.hpp"

namespace nfhn {

struct KernelTooWide : std::runtime_error {
  explicit KernelTooWide(const std::string& w) : std::runtime_error(w) {}
};

namespace detail {

// 12-point Gauss-Legendre rule on [-1, 1], positive half.
inline constexpr double kGL12x[6] = {
    0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
    0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
inline constexpr double kGL12w[6] = {
    0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
    0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// Smoothed reference step used to split truncated profiles into an
// analytic part with the right limits plus a decaying remainder.
inline double reference_step(double x) { return 0.5 * (1.0 + std::tanh(0.5 * x)); }

}

struct GridKernel {
  Grid grid;
  Kernel kernel;
  int reach = 0;                      // band covers y in [-reach*h, reach*h]
  std::vector<double> band;           // weight w_m stored at index m + reach
  double tail_left = 0.0;             // continuous mass beyond +reach*h
  double tail_right = 0.0;            // continuous mass beyond -reach*h
  std::vector<double> circ;           // periodic: band folded mod n (time domain)
  std::vector<std::complex<double>> symbol;     // periodic multiplier incl. atoms
  std::vector<std::complex<double>> band_hat;   // truncated: linear-conv spectrum
  int pad = 0;                        // transform size behind band_hat
};

inline GridKernel make_grid_kernel(const Kernel& k, const Grid& g,
                                   double tail_tol = 1e-14) {
  GridKernel gk;
  gk.grid = g;
  gk.kernel = k;
  const double h = g.h;

  double radius = 0.0;
  if (k.has_continuous())
    radius = k.support_radius(tail_tol) + std::fabs(k.shift);
  int M = std::max(3, static_cast<int>(std::ceil(radius / h)));

  for (const auto& a : k.atoms)
    if (std::fabs(a.position) > g.half_length)
      throw KernelTooWide("atom at " + std::to_string(a.position) +
                          " lies outside the grid half-length");
  if (g.boundary == Boundary::Periodic) {
    if (2 * M + 1 > g.n)
      throw KernelTooWide("kernel band of " + std::to_string(2 * M + 1) +
                          " weights exceeds the periodic grid");
  } else if (k.has_continuous() && radius >= g.half_length) {
    throw KernelTooWide("kernel mass at the domain boundary exceeds " +
                        std::to_string(tail_tol));
  }
  gk.reach = M;
  gk.band.assign(2 * M + 1, 0.0);

  if (k.has_continuous()) {
    std::vector<double> kinks = k.kinks();
    std::sort(kinks.begin(), kinks.end());
    for (int j = -M; j < M; ++j) {
      const int base = std::clamp(j - 2, -M, M - 5);
      double t[6];
      for (int q = 0; q < 6; ++q) t[q] = (base + q) * h;
      const double ya = j * h, yb = (j + 1) * h;
      std::vector<double> cuts{ya};
      for (double q : kinks)
        if (q > ya + 1e-13 && q < yb - 1e-13) cuts.push_back(q);
      cuts.push_back(yb);
      for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
        const double rad = 0.5 * (cuts[c + 1] - cuts[c]);
        for (int gp = 0; gp < 6; ++gp) {
          for (int sgn = -1; sgn <= 1; sgn += 2) {
            const double y = mid + sgn * rad * detail::kGL12x[gp];
            const double kv = k.cont(y) * detail::kGL12w[gp] * rad;
            for (int p = 0; p < 6; ++p) {
              double lag = 1.0;
              for (int q = 0; q < 6; ++q)
                if (q != p) lag *= (y - t[q]) / (t[p] - t[q]);
              gk.band[base + p + M] += kv * lag;
            }
          }
        }
      }
    }
    gk.tail_left = k.mass_above(M * h);
    gk.tail_right = k.mass_below(-M * h);

    // pin the realized mass to the exact continuous mass
    double s = gk.tail_left + gk.tail_right;
    for (double w : gk.band) s += w;
    const double target = k.cont_mass();
    if (std::fabs(s) > 1e-12 * (1.0 + std::fabs(target))) {
      const double scale = target / s;
      for (double& w : gk.band) w *= scale;
      gk.tail_left *= scale;
      gk.tail_right *= scale;
    }
  }

  if (g.boundary == Boundary::Periodic) {
    gk.circ.assign(static_cast<size_t>(g.n), 0.0);
    const auto fold = [&](int m) { return ((m % g.n) + g.n) % g.n; };
    for (int m = -M; m <= M; ++m) gk.circ[fold(m)] += gk.band[m + M];
    gk.circ[fold(M)] += gk.tail_left;
    gk.circ[fold(-M)] += gk.tail_right;
    std::vector<std::complex<double>> hat(g.n);
    for (int i = 0; i < g.n; ++i) hat[i] = gk.circ[i];
    fft_forward(hat);
    const auto ell = g.frequencies();
    gk.symbol.resize(g.n);
    for (int i = 0; i < g.n; ++i) {
      std::complex<double> atom_part(0.0, 0.0);
      for (const auto& a : k.atoms)
        atom_part += a.weight *
                     std::exp(std::complex<double>(0.0, -ell[i] * a.position));
      gk.symbol[i] = hat[i] + atom_part;
    }
  } else {
    gk.pad = detail::next_pow2(g.n + 4 * M + 8);
    std::vector<std::complex<double>> b(gk.pad, 0.0);
    for (int p = 0; p <= 2 * M; ++p) b[p] = gk.band[p];
    fft_forward(b);
    gk.band_hat = std::move(b);
  }
  return gk;
}

namespace detail {

// Shift a decaying sample set by s via a zero-padded spectral phase; the
// samples sit in the middle half of a double-length transform so shifts up
// to the grid half-length cannot wrap.
inline std::vector<double> bandlimited_shift(const std::vector<double>& u,
                                             double h, double s) {
  const int n = static_cast<int>(u.size());
  const int pad = detail::next_pow2(2 * n);
  const int off = (pad - n) / 2;
  std::vector<std::complex<double>> a(pad, 0.0);
  for (int i = 0; i < n; ++i) a[off + i] = u[i];
  fft_forward(a);
  const double base = 2.0 * M_PI / (pad * h);
  for (int k = 0; k < pad; ++k) {
    const int kk = (k <= pad / 2) ? k : k - pad;
    a[k] *= std::exp(std::complex<double>(0.0, -base * kk * s));
  }
  fft_inverse(a);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a[off + i].real();
  return out;
}

// Atom contributions on a truncated grid: analytic reference step with the
// profile's limits plus a spectral shift of the decaying remainder.
inline void add_atoms_truncated(const GridKernel& gk, const Profile& p,
                                std::vector<double>& acc) {
  if (gk.kernel.atoms.empty()) return;
  const Grid& g = gk.grid;
  const int n = g.n;
  std::vector<double> rem(n);
  for (int i = 0; i < n; ++i)
    rem[i] = p[i] - (p.left + (p.right - p.left) *
                                  detail::reference_step(g.xi(i) - g.center));
  for (const auto& a : gk.kernel.atoms) {
    const auto shifted = detail::bandlimited_shift(rem, g.h, a.position);
    for (int i = 0; i < n; ++i) {
      const double ref =
          p.left + (p.right - p.left) *
                       detail::reference_step(g.xi(i) - a.position - g.center);
      acc[i] += a.weight * (ref + shifted[i]);
    }
  }
}

}

// FFT evaluation path.
inline Profile convolve(const GridKernel& gk, const Profile& p) {
  const Grid& g = gk.grid;
  if (!g.same_layout(p.grid))
    throw std::invalid_argument("convolve: profile grid does not match kernel grid");
  Profile out(p.grid);
  out.left = gk.kernel.mass() * p.left;
  out.right = gk.kernel.mass() * p.right;
  const int n = g.n;

  if (g.boundary == Boundary::Periodic) {
    std::vector<std::complex<double>> a(n);
    for (int i = 0; i < n; ++i) a[i] = p[i];
    fft_forward(a);
    for (int i = 0; i < n; ++i) a[i] *= gk.symbol[i];
    fft_inverse(a);
    for (int i = 0; i < n; ++i) out[i] = a[i].real();
    return out;
  }

  const int M = gk.reach;
  std::vector<std::complex<double>> a(gk.pad, 0.0);
  for (int j = 0; j < n + 2 * M; ++j) {
    const int i = j - M;
    a[j] = (i < 0) ? p.left : (i >= n ? p.right : p[i]);
  }
  fft_forward(a);
  for (int i = 0; i < gk.pad; ++i) a[i] *= gk.band_hat[i];
  fft_inverse(a);
  for (int i = 0; i < n; ++i)
    out[i] = a[i + 2 * M].real() + p.left * gk.tail_left +
             p.right * gk.tail_right;
  detail::add_atoms_truncated(gk, p, out.y);
  return out;
}

// Direct banded-summation path; same weights, independent evaluation.
inline Profile convolve_direct(const GridKernel& gk, const Profile& p) {
  const Grid& g = gk.grid;
  if (!g.same_layout(p.grid))
    throw std::invalid_argument("convolve: profile grid does not match kernel grid");
  Profile out(p.grid);
  out.left = gk.kernel.mass() * p.left;
  out.right = gk.kernel.mass() * p.right;
  const int n = g.n;

  if (g.boundary == Boundary::Periodic) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += gk.circ[j] * p[((i - j) % n + n) % n];
      out[i] = s;
    }
    if (!gk.kernel.atoms.empty()) {
      // atoms as exact spectral translations of the periodic signal
      std::vector<std::complex<double>> a(n);
      for (int i = 0; i < n; ++i) a[i] = p[i];
      fft_forward(a);
      const auto ell = g.frequencies();
      for (int i = 0; i < n; ++i) {
        std::complex<double> phase(0.0, 0.0);
        for (const auto& at : gk.kernel.atoms)
          phase += at.weight *
                   std::exp(std::complex<double>(0.0, -ell[i] * at.position));
        a[i] *= phase;
      }
      fft_inverse(a);
      for (int i = 0; i < n; ++i) out[i] += a[i].real();
    }
    return out;
  }

  const int M = gk.reach;
  for (int i = 0; i < n; ++i) {
    double s = p.left * gk.tail_left + p.right * gk.tail_right;
    for (int m = -M; m <= M; ++m) {
      const int j = i - m;
      const double uv = (j < 0) ? p.left : (j >= n ? p.right : p[j]);
      s += gk.band[m + M] * uv;
    }
    out[i] = s;
  }
  detail::add_atoms_truncated(gk, p, out.y);
  return out;
}

// Both sides of the small-epsilon comparison between the rescaled coupling
// and the identity: the measured L2 defect and its first-order bound.
struct GapReport {
  double measured = 0.0;
  double bound = 0.0;
};

inline GapReport kdelta_gap(const Profile& w, const Kernel& k, double eps) {
  const Kernel ke = rescale(k, eps);
  const GridKernel gk = make_grid_kernel(ke, w.grid);
  const Profile conv = convolve(gk, w);
  Profile diff(w.grid);
  for (int i = 0; i < w.grid.n; ++i) diff[i] = conv[i] - w[i];
  GapReport rep;
  rep.measured = weighted_norm(diff, WeightSpec{0.0, 0.0}, NormOrder::L2);
  rep.bound = std::sqrt(second_moment(ke)) *
              weighted_norm(w, WeightSpec{0.0, 0.0}, NormOrder::H1);
  return rep;
}

}

#endif
