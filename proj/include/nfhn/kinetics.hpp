#ifndef NFHN_KINETICS_HPP
#define NFHN_KINETICS_HPP

/*
 * Reaction kinetics of the excitable medium: the bistable nonlinearity f,
 * its derivatives, the fold values bounding the bistable range, the outer
 * branch maps phi_q/phi_e of f(u) = v, and the rest-state certification.
 *
 * The canonical form is the cubic f(u) = u (1 - u) (u - a).  A user supplied
 * form must bring analytic first and second derivatives; all downstream
 * Jacobians use them directly.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nfhn/roots.hpp"

namespace nfhn {

struct OutsideBistableRange : std::runtime_error {
  explicit OutsideBistableRange(const std::string& w) : std::runtime_error(w) {}
};
struct DegenerateRoot : std::runtime_error {
  explicit DegenerateRoot(const std::string& w) : std::runtime_error(w) {}
};
struct NotBistable : std::runtime_error {
  explicit NotBistable(const std::string& w) : std::runtime_error(w) {}
};

struct BistableRange {
  double v_min = 0.0;   // f at the interior local minimum
  double v_max = 0.0;   // f at the interior local maximum
};

struct BranchRoots {
  double q = 0.0;   // quiescent (lowest) root
  double m = 0.0;   // middle (unstable) root
  double e = 0.0;   // excited (highest) root
};

struct Kinetics {
  double a = 0.25;       // threshold parameter of the cubic form
  double gamma = 0.05;   // recovery coupling
  bool cubic = true;
  std::function<double(double)> f_user, df_user, d2f_user;

  double f(double u) const {
    if (cubic) return u * (1.0 - u) * (u - a);
    return f_user(u);
  }
  double df(double u) const {
    if (cubic) return -3.0 * u * u + 2.0 * (1.0 + a) * u - a;
    return df_user(u);
  }
  double d2f(double u) const {
    if (cubic) return -6.0 * u + 2.0 * (1.0 + a);
    return d2f_user(u);
  }

  static Kinetics cubic_form(double a, double gamma) {
    Kinetics k;
    k.a = a;
    k.gamma = gamma;
    k.cubic = true;
    return k;
  }
  static Kinetics user_form(std::function<double(double)> f,
                            std::function<double(double)> df,
                            std::function<double(double)> d2f, double gamma) {
    Kinetics k;
    k.cubic = false;
    k.f_user = std::move(f);
    k.df_user = std::move(df);
    k.d2f_user = std::move(d2f);
    k.gamma = gamma;
    return k;
  }
};

// Interior critical points of f (local minimum first).  For the cubic these
// are (1 + a -+ sqrt(1 - a + a^2)) / 3; user forms are scanned numerically.
inline std::pair<double, double> critical_points(const Kinetics& kin) {
  if (kin.cubic) {
    const double s = std::sqrt(1.0 - kin.a + kin.a * kin.a);
    return {(1.0 + kin.a - s) / 3.0, (1.0 + kin.a + s) / 3.0};
  }
  std::vector<double> crit;
  const double lo = -1.0, hi = 2.0;
  const int n = 6000;
  double prev_u = lo, prev_d = kin.df(lo);
  for (int i = 1; i <= n; ++i) {
    const double u = lo + (hi - lo) * i / n;
    const double d = kin.df(u);
    if ((prev_d > 0.0) != (d > 0.0) && prev_d != 0.0)
      crit.push_back(brent([&](double x) { return kin.df(x); }, prev_u, u));
    prev_u = u;
    prev_d = d;
  }
  if (crit.size() != 2)
    throw NotBistable("kinetics: expected two interior critical points, found " +
                      std::to_string(crit.size()));
  if (kin.f(crit[0]) > kin.f(crit[1])) std::swap(crit[0], crit[1]);
  return {crit[0], crit[1]};
}

inline BistableRange bistable_range(const Kinetics& kin) {
  const auto [umin, umax] = critical_points(kin);
  BistableRange r;
  r.v_min = kin.f(umin);
  r.v_max = kin.f(umax);
  if (!(r.v_min < r.v_max))
    throw NotBistable("kinetics: fold values are not ordered");
  return r;
}

// The three simple roots of f(u) = v for v strictly inside the bistable
// range, ascending.  Each root is polished by Brent on its own monotone
// bracket and checked against the degeneracy tolerance |f'| > 1e-8.
inline BranchRoots branch_roots(const Kinetics& kin, double v) {
  const auto [umin, umax] = critical_points(kin);
  const BistableRange r = bistable_range(kin);
  if (!(v > r.v_min && v < r.v_max))
    throw OutsideBistableRange("branch_roots: v = " + std::to_string(v) +
                               " outside (" + std::to_string(r.v_min) + ", " +
                               std::to_string(r.v_max) + ")");
  const auto g = [&](double u) { return kin.f(u) - v; };

  // f decreases to the left of umin, increases on [umin, umax], decreases
  // to the right of umax; expand the outer brackets until the sign flips.
  double lo = umin - 1.0;
  while (g(lo) < 0.0) lo -= 1.0;
  double hi = umax + 1.0;
  while (g(hi) > 0.0) hi += 1.0;

  BranchRoots out;
  out.q = brent(g, lo, umin);
  out.m = brent(g, umin, umax);
  out.e = brent(g, umax, hi);
  const double degeneracy_tol = 1e-8;
  for (double u : {out.q, out.m, out.e})
    if (std::fabs(kin.df(u)) <= degeneracy_tol)
      throw DegenerateRoot("branch_roots: |f'(root)| below tolerance at u = " +
                           std::to_string(u));
  return out;
}

inline double phi_q(const Kinetics& kin, double v) { return branch_roots(kin, v).q; }
inline double phi_m(const Kinetics& kin, double v) { return branch_roots(kin, v).m; }
inline double phi_e(const Kinetics& kin, double v) { return branch_roots(kin, v).e; }

// Certification report for the rest state: f vanishes at 0 and 1 with
// negative slopes, gamma is positive, and f(gamma v) = v has no solution
// away from v = 0 (no extra equilibria of the full system).
struct H1Report {
  bool f0_zero = false;
  bool f1_zero = false;
  bool fp0_negative = false;
  bool fp1_negative = false;
  bool gamma_positive = false;
  bool no_extra_equilibria = false;
  bool a_below_half = false;   // informational; does not gate pass()
  double fp0 = 0.0;
  double fp1 = 0.0;
  double min_gap_abs = 0.0;    // min |f(gamma v) - v| over probes away from 0
  double min_gap_rel = 0.0;    // min |f(gamma v) - v| / max(|v|, floor)
  bool pass() const {
    return f0_zero && f1_zero && fp0_negative && fp1_negative &&
           gamma_positive && no_extra_equilibria;
  }
};

inline H1Report check_H1(const Kinetics& kin,
                         std::vector<double> v_probe = {}) {
  H1Report rep;
  rep.f0_zero = std::fabs(kin.f(0.0)) < 1e-14;
  rep.f1_zero = std::fabs(kin.f(1.0)) < 1e-14;
  rep.fp0 = kin.df(0.0);
  rep.fp1 = kin.df(1.0);
  rep.fp0_negative = rep.fp0 < 0.0;
  rep.fp1_negative = rep.fp1 < 0.0;
  rep.gamma_positive = kin.gamma > 0.0;
  rep.a_below_half = !kin.cubic || kin.a < 0.5;

  if (v_probe.empty()) {
    // Default probe: v spanning the u-range [-0.5, 1.5] of candidate
    // equilibria u = gamma v; for gamma = 0 the grid is a token interval
    // (the gamma check already fails the report).
    const double scale = rep.gamma_positive ? 1.0 / kin.gamma : 1.0;
    const int n = 1000;
    v_probe.resize(n + 1);
    for (int i = 0; i <= n; ++i)
      v_probe[i] = (-0.5 + 2.0 * i / n) * scale;
  }
  double span = 0.0;
  for (double v : v_probe) span = std::max(span, std::fabs(v));
  const double away = 0.01 * span, floor = 1e-6 * span;
  double gap_abs = std::numeric_limits<double>::infinity();
  double gap_rel = std::numeric_limits<double>::infinity();
  bool sign_ok = true;
  for (double v : v_probe) {
    if (v == 0.0) continue;
    const double g = kin.f(kin.gamma * v) - v;
    gap_rel = std::min(gap_rel, std::fabs(g) / std::max(std::fabs(v), floor));
    if (std::fabs(v) >= away) {
      gap_abs = std::min(gap_abs, std::fabs(g));
      // no crossing: f(gamma v) - v keeps the sign of -v on each side
      if (v > 0.0 ? g >= 0.0 : g <= 0.0) sign_ok = false;
    }
  }
  rep.min_gap_abs = gap_abs;
  rep.min_gap_rel = gap_rel;
  rep.no_extra_equilibria = sign_ok && gap_abs > 0.0;
  return rep;
}

}

#endif
