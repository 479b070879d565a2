#ifndef NFHN_KERNEL_HPP
#define NFHN_KERNEL_HPP

/*
 * Nonlocal coupling kernel: a continuous part with declared exponential
 * decay plus a finite list of point masses.  Supplies the Fourier symbol,
 * mass and second moment, epsilon-rescaling, and the coupling-hypothesis
 * certification used before any wave solve.
 *
 * Exponential and Gaussian parts carry closed-form symbols and tail masses;
 * tabulated kernels are compactly supported cubic interpolants evaluated by
 * quadrature.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfhn {

struct ZeroMass : std::runtime_error {
  explicit ZeroMass(const std::string& w) : std::runtime_error(w) {}
};
struct NonpositiveEpsilon : std::runtime_error {
  explicit NonpositiveEpsilon(const std::string& w) : std::runtime_error(w) {}
};

struct KernelAtom {
  double weight = 0.0;
  double position = 0.0;
};

struct Kernel {
  enum class Form { None, Exponential, Gaussian, Table };

  Form form = Form::Exponential;
  double amplitude = 1.0;   // multiplier on the base shape
  double rate = 1.0;        // exponential decay rate
  double sigma = 1.0;       // Gaussian width
  double shift = 0.0;       // center offset of the continuous part
  std::vector<double> table_x, table_y;   // uniform nodes and samples
  double eta0 = 1.0;        // declared exponential decay rate of the tails
  std::vector<KernelAtom> atoms;

  // ---- factories ------------------------------------------------------

  static Kernel exponential(double rate = 1.0, double shift = 0.0) {
    Kernel k;
    k.form = Form::Exponential;
    k.rate = rate;
    k.shift = shift;
    k.eta0 = rate;
    return k;
  }
  static Kernel gaussian(double sigma = 1.0, double shift = 0.0) {
    Kernel k;
    k.form = Form::Gaussian;
    k.sigma = sigma;
    k.shift = shift;
    k.eta0 = 1.0 / sigma;
    return k;
  }
  static Kernel table(std::vector<double> x, std::vector<double> y,
                      double eta0 = 1.0) {
    if (x.size() < 4 || x.size() != y.size())
      throw std::invalid_argument("kernel table needs >= 4 matched samples");
    Kernel k;
    k.form = Form::Table;
    k.table_x = std::move(x);
    k.table_y = std::move(y);
    k.eta0 = eta0;
    return k;
  }
  static Kernel atoms_only(std::vector<KernelAtom> a, double eta0 = 1.0) {
    Kernel k;
    k.form = Form::None;
    k.amplitude = 0.0;
    k.atoms = std::move(a);
    k.eta0 = eta0;
    return k;
  }

  bool has_continuous() const {
    return form != Form::None && amplitude != 0.0;
  }

  // ---- pointwise evaluation of the continuous part --------------------

  double cont(double x) const {
    if (!has_continuous()) return 0.0;
    switch (form) {
      case Form::Exponential:
        return amplitude * std::exp(-rate * std::fabs(x - shift));
      case Form::Gaussian: {
        const double t = (x - shift) / sigma;
        return amplitude * std::exp(-0.5 * t * t);
      }
      case Form::Table:
        return amplitude * table_eval(x);
      default:
        return 0.0;
    }
  }

  // Locations where the continuous part is not smooth; convolution
  // quadrature splits its cells there.
  std::vector<double> kinks() const {
    switch (form) {
      case Form::Exponential:
        return {shift};
      case Form::Table:
        return table_x;
      default:
        return {};
    }
  }

  // ---- masses ---------------------------------------------------------

  double cont_mass() const {
    if (!has_continuous()) return 0.0;
    switch (form) {
      case Form::Exponential:
        return amplitude * 2.0 / rate;
      case Form::Gaussian:
        return amplitude * sigma * std::sqrt(2.0 * M_PI);
      case Form::Table:
        return amplitude * table_integral([](double, double k) { return k; });
      default:
        return 0.0;
    }
  }
  double atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }
  double mass() const { return cont_mass() + atom_mass(); }

  // Mass of the continuous part above x (toward +inf).
  double mass_above(double x) const {
    if (!has_continuous()) return 0.0;
    switch (form) {
      case Form::Exponential: {
        const double t = x - shift;
        if (t >= 0.0) return amplitude * std::exp(-rate * t) / rate;
        return amplitude * (2.0 - std::exp(rate * t)) / rate;
      }
      case Form::Gaussian:
        return amplitude * sigma * std::sqrt(M_PI / 2.0) *
               std::erfc((x - shift) / (sigma * std::sqrt(2.0)));
      case Form::Table: {
        double s = 0.0;
        const double hi = table_x.back();
        if (x >= hi) return 0.0;
        const double lo = std::max(x, table_x.front());
        const int n = 2000;
        const double h = (hi - lo) / n;
        for (int i = 0; i <= n; ++i) {
          const double w = (i == 0 || i == n) ? 0.5 : 1.0;
          s += w * table_eval(lo + i * h);
        }
        return amplitude * s * h;
      }
      default:
        return 0.0;
    }
  }
  double mass_below(double x) const {
    // exponential and Gaussian parts are symmetric about the shift, so the
    // reflected tail avoids cancellation when the mass below x is tiny
    if (form == Form::Exponential || form == Form::Gaussian)
      return mass_above(2.0 * shift - x);
    if (form == Form::Table && x <= table_x.front()) return 0.0;
    return cont_mass() - mass_above(x);
  }

  // Radius R around the center such that the continuous mass outside
  // [center - R, center + R] stays below tol.
  double support_radius(double tol) const {
    if (!has_continuous()) return 0.0;
    if (form == Form::Table)
      return std::max(table_x.back() - shift, shift - table_x.front());
    double r = 1.0;
    while (mass_above(shift + r) + mass_below(shift - r) > tol && r < 1e6)
      r *= 2.0;
    double lo = r / 2.0, hi = r;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mass_above(shift + mid) + mass_below(shift - mid) > tol)
        lo = mid;
      else
        hi = mid;
    }
    return hi;
  }

  // ---- internals ------------------------------------------------------

  // Catmull-Rom interpolation on the uniform table; zero outside support.
  double table_eval(double x) const {
    const double x0 = table_x.front(), xn = table_x.back();
    if (x < x0 || x > xn) return 0.0;
    const double h = table_x[1] - table_x[0];
    int i = static_cast<int>(std::floor((x - x0) / h));
    i = std::clamp(i, 0, static_cast<int>(table_x.size()) - 2);
    const double t = (x - table_x[i]) / h;
    const int n = static_cast<int>(table_x.size());
    const double ym = table_y[std::max(i - 1, 0)];
    const double y0 = table_y[i];
    const double y1 = table_y[i + 1];
    const double yp = table_y[std::min(i + 2, n - 1)];
    const double m0 = (i == 0) ? (y1 - y0) : 0.5 * (y1 - ym);
    const double m1 = (i == n - 2) ? (y1 - y0) : 0.5 * (yp - y0);
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 +
           (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
  }

  // Simpson quadrature of g(x, K_base(x)) over the table support, sampling
  // the interpolant eight times per table cell.
  double table_integral(const std::function<double(double, double)>& g) const {
    const double lo = table_x.front(), hi = table_x.back();
    int n = 8 * static_cast<int>(table_x.size());
    if (n % 2) ++n;
    const double h = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = lo + i * h;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * g(x, table_eval(x));
    }
    return s * h / 3.0;
  }
};

// Scale the kernel so its total mass is exactly one.
inline Kernel normalize(const Kernel& k) {
  const double m = k.mass();
  if (std::fabs(m) < 1e-14)
    throw ZeroMass("normalize: kernel mass is zero");
  Kernel out = k;
  out.amplitude /= m;
  for (auto& a : out.atoms) a.weight /= m;
  return out;
}

// Fourier transform K-hat(l) = int K(x) exp(-i l x) dx plus atom phases.
inline std::complex<double> fourier_symbol(const Kernel& k, double ell) {
  std::complex<double> s(0.0, 0.0);
  if (k.has_continuous()) {
    const std::complex<double> phase =
        std::exp(std::complex<double>(0.0, -ell * k.shift));
    switch (k.form) {
      case Kernel::Form::Exponential:
        s += phase * (k.amplitude * 2.0 * k.rate /
                      (k.rate * k.rate + ell * ell));
        break;
      case Kernel::Form::Gaussian:
        s += phase * (k.amplitude * k.sigma * std::sqrt(2.0 * M_PI) *
                      std::exp(-0.5 * k.sigma * k.sigma * ell * ell));
        break;
      case Kernel::Form::Table: {
        const double re =
            k.table_integral([&](double x, double kx) { return kx * std::cos(ell * x); });
        const double im =
            k.table_integral([&](double x, double kx) { return -kx * std::sin(ell * x); });
        s += k.amplitude * std::complex<double>(re, im);
        break;
      }
      default:
        break;
    }
  }
  for (const auto& a : k.atoms)
    s += a.weight * std::exp(std::complex<double>(0.0, -ell * a.position));
  return s;
}

// Second absolute moment int y^2 |K(y)| dy + sum |a_j| xi_j^2.
inline double second_moment(const Kernel& k) {
  double s = 0.0;
  if (k.has_continuous()) {
    switch (k.form) {
      case Kernel::Form::Exponential:
        s += std::fabs(k.amplitude) *
             (2.0 * k.shift * k.shift / k.rate + 4.0 / std::pow(k.rate, 3));
        break;
      case Kernel::Form::Gaussian:
        s += std::fabs(k.amplitude) * k.sigma * std::sqrt(2.0 * M_PI) *
             (k.shift * k.shift + k.sigma * k.sigma);
        break;
      case Kernel::Form::Table:
        s += std::fabs(k.amplitude) *
             k.table_integral([](double x, double kx) { return x * x * std::fabs(kx); });
        break;
      default:
        break;
    }
  }
  for (const auto& a : k.atoms)
    s += std::fabs(a.weight) * a.position * a.position;
  return s;
}

// K_eps(z) = (1/eps) K(z/eps); atoms move to eps * xi_j.  Mass is
// preserved and the second moment picks up a factor eps^2.
inline Kernel rescale(const Kernel& k, double eps) {
  if (!(eps > 0.0))
    throw NonpositiveEpsilon("rescale: eps = " + std::to_string(eps));
  Kernel out = k;
  out.eta0 = k.eta0 / eps;
  out.shift = k.shift * eps;
  switch (k.form) {
    case Kernel::Form::Exponential:
      out.rate = k.rate / eps;
      out.amplitude = k.amplitude / eps;
      break;
    case Kernel::Form::Gaussian:
      out.sigma = k.sigma * eps;
      out.amplitude = k.amplitude / eps;
      break;
    case Kernel::Form::Table:
      for (auto& x : out.table_x) x *= eps;
      out.amplitude = k.amplitude / eps;
      break;
    default:
      break;
  }
  for (auto& a : out.atoms) a.position *= eps;
  return out;
}

// Spatial reflection K~(x) = K(-x), the kernel appearing in the adjoint of
// a convolution operator.
inline Kernel reflected(const Kernel& k) {
  Kernel out = k;
  out.shift = -k.shift;
  if (k.form == Kernel::Form::Table) {
    const size_t m = k.table_x.size();
    for (size_t i = 0; i < m; ++i) {
      out.table_x[i] = -k.table_x[m - 1 - i];
      out.table_y[i] = k.table_y[m - 1 - i];
    }
  }
  for (auto& a : out.atoms) a.position = -a.position;
  return out;
}

// Certification of the coupling hypothesis: strict symbol negativity away
// from frequency zero, exponential tail decay at the declared rate, and
// finiteness of the weighted atom sum.  The relaxed margin adds the largest
// reaction slope over a probe interval when one is supplied.
struct H2Report {
  double max_symbol_margin = 0.0;   // max over grid of Re K-hat - 1
  bool symbol_negative = false;
  double fitted_decay_rate = 0.0;
  double tail_constant = 0.0;       // sup |K_cont| e^{eta0 |x - shift|}
  bool tail_ok = false;
  double atom_sum = 0.0;            // sum |a_j| e^{eta0 |xi_j|}
  bool atoms_summable = false;
  bool has_relaxed = false;
  double relaxed_margin = 0.0;      // max_l (Re K-hat - 1) + max_u f'(u)
  bool relaxed_negative = false;
  bool pass() const { return symbol_negative && tail_ok && atoms_summable; }
};

inline H2Report check_H2(const Kernel& k, const std::vector<double>& ell_grid,
                         const std::function<double(double)>& fprime = nullptr,
                         double u_lo = 0.0, double u_hi = 0.0) {
  H2Report rep;

  double margin = -std::numeric_limits<double>::infinity();
  for (double ell : ell_grid) {
    if (ell == 0.0) continue;
    margin = std::max(margin, fourier_symbol(k, ell).real() - 1.0);
  }
  rep.max_symbol_margin = margin;
  rep.symbol_negative = margin < -1e-10;

  if (k.has_continuous()) {
    // one-sided log-linear fits of the tail over [2, 16] decay lengths
    double worst_rate = std::numeric_limits<double>::infinity();
    double worst_c = 0.0;
    for (int side = -1; side <= 1; side += 2) {
      std::vector<double> xs, ls;
      for (int i = 0; i <= 80; ++i) {
        const double d = (2.0 + 14.0 * i / 80.0) / k.eta0;
        const double val = std::fabs(k.cont(k.shift + side * d));
        worst_c = std::max(worst_c, val * std::exp(k.eta0 * d));
        if (val > 1e-300) {
          xs.push_back(d);
          ls.push_back(std::log(val));
        }
      }
      if (xs.size() < 8) continue;   // tail is (numerically) compact
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ls[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ls[i];
      }
      const double n = static_cast<double>(xs.size());
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      worst_rate = std::min(worst_rate, -slope);
    }
    rep.fitted_decay_rate = worst_rate;
    rep.tail_constant = worst_c;
    rep.tail_ok = worst_rate >= 0.99 * k.eta0;
  } else {
    rep.fitted_decay_rate = std::numeric_limits<double>::infinity();
    rep.tail_constant = 0.0;
    rep.tail_ok = true;
  }

  for (const auto& a : k.atoms)
    rep.atom_sum += std::fabs(a.weight) * std::exp(k.eta0 * std::fabs(a.position));
  rep.atoms_summable = std::isfinite(rep.atom_sum);

  if (fprime) {
    rep.has_relaxed = true;
    double fp = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i)
      fp = std::max(fp, fprime(u_lo + (u_hi - u_lo) * i / 400.0));
    rep.relaxed_margin = rep.max_symbol_margin + fp;
    rep.relaxed_negative = rep.relaxed_margin < -1e-10;
  }
  return rep;
}

}

#endif
