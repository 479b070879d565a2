#ifndef NFHN_ROOTS_HPP
#define NFHN_ROOTS_HPP

/*
 * Bracketed scalar root finding (Brent's method).  Used wherever a one
 * dimensional matching condition closes a solve: cubic branch roots,
 * back-to-front speed matching, shooting comparisons in the tests.
 */

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace nfhn {

struct BracketError : std::runtime_error {
  explicit BracketError(const std::string& what) : std::runtime_error(what) {}
};

// Brent's method on a sign-changing bracket [a, b].  Stops when the bracket
// shrinks below xtol (absolute) or |f| drops to ftol.
inline double brent(const std::function<double(double)>& f, double a, double b,
                    double xtol = 1e-14, double ftol = 0.0, int max_iter = 200) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw BracketError("brent: endpoints do not straddle a root");
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a; fc = fa; d = b - a; e = d;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::fabs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) <= ftol) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      // inverse quadratic interpolation, falling back to secant
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
      const double min2 = std::fabs(e * q);
      if (2.0 * p < (min1 < min2 ? min1 : min2)) {
        e = d; d = p / q;
      } else {
        d = xm; e = d;
      }
    } else {
      d = xm; e = d;
    }
    a = b; fa = fb;
    if (std::fabs(d) > tol1) b += d;
    else b += (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

// Expands [a, b] geometrically until f changes sign, then calls brent.
inline double brent_expand(const std::function<double(double)>& f, double a,
                           double b, double xtol = 1e-14) {
  double fa = f(a), fb = f(b);
  double w = b - a;
  for (int k = 0; k < 60 && (fa > 0.0) == (fb > 0.0); ++k) {
    if (std::fabs(fa) < std::fabs(fb)) {
      a -= w; fa = f(a);
    } else {
      b += w; fb = f(b);
    }
    w *= 1.6;
  }
  if ((fa > 0.0) == (fb > 0.0))
    throw BracketError("brent_expand: no sign change found");
  return brent(f, a, b, xtol);
}

}

#endif
