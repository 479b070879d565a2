#ifndef NFHN_SLOW_MANIFOLD_HPP
#define NFHN_SLOW_MANIFOLD_HPP

/*
 * Slow-manifold machinery for the two time-scale pulse construction: the
 * recovery cut-off that freezes the dynamics outside the traversed window,
 * the reduced (epsilon = 0) heteroclinic flows along the stable outer
 * branches of the nonlinearity, the full two-component residual at
 * epsilon > 0, a frozen-coefficient Green's function preconditioner for
 * the fast part of the linearization, the Newton solver that persists the
 * reduced solutions to small epsilon, and the transit-time functional that
 * clocks the excursion along the excited branch.
 *
 * Profiles here live on a slow grid in the variable zeta; the activator
 * component is slaved to the recovery component through the outer branch
 * roots of f(u) = v at leading order.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfhn/banded.hpp"
#include "nfhn/convolution.hpp"
#include "nfhn/fft.hpp"
#include "nfhn/grid.hpp"
#include "nfhn/kernel.hpp"
#include "nfhn/kinetics.hpp"
#include "nfhn/newton.hpp"
#include "nfhn/ode.hpp"
#include "nfhn/roots.hpp"

namespace nfhn {

struct BadOrdering : std::invalid_argument {
  explicit BadOrdering(const std::string& w) : std::invalid_argument(w) {}
};
struct VectorFieldSignError : std::runtime_error {
  explicit VectorFieldSignError(const std::string& w) : std::runtime_error(w) {}
};
struct SymbolZero : std::runtime_error {
  explicit SymbolZero(const std::string& w) : std::runtime_error(w) {}
};
struct IterationStalled : std::runtime_error {
  explicit IterationStalled(const std::string& w) : std::runtime_error(w) {}
};
struct SlowFlowDegenerate : std::runtime_error {
  explicit SlowFlowDegenerate(const std::string& w) : std::runtime_error(w) {}
};

enum class SlowBranch { Quiescent, Excitatory };
enum class SlowPath { Direct, Series };

namespace detail {

// Ingredients of the exp(-1/t) smoothstep.  bump is flat to all orders at
// t = 0; smoothstep rises monotonically from 0 to 1 on [0, 1] and is flat
// against both constants.
inline double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double p = bump(t), q = bump(1.0 - t);
  return p / (p + q);
}

inline double smoothstep_slope(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double p = bump(t), q = bump(1.0 - t);
  const double pp = p > 0.0 ? p / (t * t) : 0.0;
  const double qp = q > 0.0 ? q / ((1.0 - t) * (1.0 - t)) : 0.0;
  const double den = p + q;
  return (pp * q + p * qp) / (den * den);
}

// Roll-off shape on [0, 1]: starts flat against the value 1 and meets zero
// transversally, rho(1) = 0 with rho'(1) = -1.  The transversal end is what
// turns the support edges of the cut-off into hyperbolic rest states of the
// slow flow, so the heteroclinics approach them at an exponential rate the
// grid sizing can rely on; a fully flat smoothstep would make the approach
// logarithmically slow and the far-field limits unreachable.  The price is
// a kink exactly at the support edge, which the flow never crosses.
inline double rolloff(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - t * smoothstep(t);
}

inline double rolloff_slope(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -smoothstep(t) - t * smoothstep_slope(t);
}

}

// Smooth window in the recovery variable: identically one on the plateau
// [v_minus, v_plus], rolling off to zero over one width on each side.
struct Cutoff {
  double v_minus = 0.0;   // lower plateau edge
  double v_plus = 0.0;    // upper plateau edge
  double width = 0.0;     // roll-off width on each side

  double support_lower() const { return v_minus - width; }
  double support_upper() const { return v_plus + width; }

  double value(double v) const {
    if (v >= v_minus && v <= v_plus) return 1.0;
    if (v > v_plus) return detail::rolloff((v - v_plus) / width);
    return detail::rolloff((v_minus - v) / width);
  }

  double slope(double v) const {
    if (v >= v_minus && v <= v_plus) return 0.0;
    if (v > v_plus) return detail::rolloff_slope((v - v_plus) / width) / width;
    return -detail::rolloff_slope((v_minus - v) / width) / width;
  }
};

inline Cutoff make_cutoff(double v_plus, double v_minus, double width) {
  if (!(v_minus < 0.0) || !(v_plus > 0.0) || !(width > 0.0))
    throw BadOrdering("cutoff needs v_minus < 0 < v_plus and width > 0, got (" +
                      std::to_string(v_minus) + ", " + std::to_string(v_plus) +
                      ", " + std::to_string(width) + ")");
  Cutoff c;
  c.v_minus = v_minus;
  c.v_plus = v_plus;
  c.width = width;
  return c;
}

// Default placement around the matched recovery offset: the plateau covers
// the traversed range [0, v_star] with a 30 percent margin toward the fold
// value above and a matching margin below zero, and the support stays
// strictly inside the bistable band.
inline Cutoff default_cutoff(const Kinetics& kin, double v_star) {
  const BistableRange br = bistable_range(kin);
  if (!(v_star > 0.0) || !(v_star < br.v_max))
    throw BadOrdering("recovery offset " + std::to_string(v_star) +
                      " is not inside (0, " + std::to_string(br.v_max) + ")");
  const Cutoff c = make_cutoff(v_star + 0.3 * (br.v_max - v_star),
                               -0.3 * v_star, 0.1 * v_star);
  if (!(c.support_upper() < br.v_max))
    throw BadOrdering("cutoff support reaches past the fold at v = " +
                      std::to_string(br.v_max));
  return c;
}

namespace detail {

// Root of f(u) = v on an outer branch, valid beyond the bistable band where
// the branch itself extends (the excited branch continues below v_min, the
// quiescent branch above v_max is not needed and not provided).
inline double branch_value(const Kinetics& kin, SlowBranch branch, double v) {
  const auto cp = critical_points(kin);
  const auto g = [&](double u) { return kin.f(u) - v; };
  int guard = 0;
  if (branch == SlowBranch::Quiescent) {
    const double hi = cp.first;
    if (!(g(hi) < 0.0))
      throw OutsideBistableRange("no quiescent-branch root at v = " +
                                 std::to_string(v));
    double lo = hi - 0.5;
    while (g(lo) < 0.0) {
      lo -= 0.5;
      if (++guard > 60)
        throw OutsideBistableRange("quiescent-branch bracket failed at v = " +
                                   std::to_string(v));
    }
    return brent(g, lo, hi);
  }
  const double lo = cp.second;
  if (!(g(lo) > 0.0))
    throw OutsideBistableRange("no excited-branch root at v = " +
                               std::to_string(v));
  double hi = lo + 0.5;
  while (g(hi) > 0.0) {
    hi += 0.5;
    if (++guard > 60)
      throw OutsideBistableRange("excited-branch bracket failed at v = " +
                                 std::to_string(v));
  }
  return brent(g, lo, hi);
}

}

// Reduced slow vector field dv/dzeta = -(phi_branch(v) - gamma v) Theta(v) / c.
inline double slow_flow(const Kinetics& kin, SlowBranch branch,
                        const Cutoff& cut, double c, double v) {
  const double th = cut.value(v);
  if (th == 0.0) return 0.0;
  const double u = detail::branch_value(kin, branch, v);
  return -(u - kin.gamma * v) * th / c;
}

struct SlowOptions {
  int n = 2048;               // nodes on the slow grid
  double span = 40.0;         // e-folds of the approach rates covered per side
  double pad = 0.0;           // extra slow length added to each side
  double ode_rtol = 1e-12;    // reduced-flow integration tolerances
  double ode_atol = 1e-14;
  double tol = 1e-9;          // L2 residual target for the persisted solve
  int max_iter = 60;
  double tail_tol = 1e-14;    // kernel truncation in residual convolutions
  double jac_tail_tol = 1e-10;  // looser truncation inside the Jacobian band
  int lattice = 33;           // frozen Green's base points
  int series_max = 400;       // cap on preconditioned inner iterations
  SlowPath path = SlowPath::Direct;
};

struct SlowHeteroclinic {
  SlowBranch branch = SlowBranch::Quiescent;
  double eps = 0.0;
  double c = 0.0;
  Grid grid;                    // slow variable zeta
  std::vector<double> v;        // recovery component at the nodes
  std::vector<double> u;        // activator component at the nodes
  double v_left = 0.0;          // flow equilibria at the two ends
  double v_right = 0.0;
  double u_left = 0.0;          // matching activator far-field values
  double u_right = 0.0;
  double rate_left = 0.0;       // linearized approach rates of the flow
  double rate_right = 0.0;
  int anchor_index = 0;         // node where the normalization is imposed
  double anchor_value = 0.0;
  double residual = 0.0;        // see solve_reduced / solve_slow
  double correction = 0.0;      // H1 distance from the reduced start
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<double> update_history;

  Profile u_profile() const {
    Profile p(grid);
    p.y = u;
    p.left = u_left;
    p.right = u_right;
    return p;
  }
  Profile v_profile() const {
    Profile p(grid);
    p.y = v;
    p.left = v_left;
    p.right = v_right;
    return p;
  }
};

namespace detail {

// Slow grid with lengths span/rate per side plus padding, laid out so that
// zeta = 0 falls exactly on a node.
inline Grid make_slow_grid(double rate_left, double rate_right, double span,
                           double pad, int n, int& anchor_index) {
  const double l_left = span / rate_left + pad;
  const double l_right = span / rate_right + pad;
  const double half = 0.5 * (l_left + l_right);
  const double h = 2.0 * half / n;
  anchor_index = std::clamp(static_cast<int>(std::llround(l_left / h)), 4, n - 5);
  return Grid::make(half, n, Boundary::Truncated, half - anchor_index * h);
}

inline const DenseStep& locate_step(const OdeResult& r, double t) {
  size_t lo = 0, hi = r.dense.size() - 1;
  const bool fwd = r.dense.front().t1 > r.dense.front().t0;
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (fwd ? (t > r.dense[mid].t1) : (t < r.dense[mid].t1))
      lo = mid + 1;
    else
      hi = mid;
  }
  return r.dense[lo];
}

// Value and exact derivative of the scalar continuous extension; the dense
// polynomial is quartic, so differentiating it analytically avoids any
// finite-difference noise.
inline double dense_scalar(const DenseStep& ds, double t, double& deriv) {
  const double s = (t - ds.t0) / (ds.t1 - ds.t0);
  const double s1 = 1.0 - s;
  const double r1 = ds.r1[0], r2 = ds.r2[0], r3 = ds.r3[0], r4 = ds.r4[0],
               r5 = ds.r5[0];
  const double C = r4 + s1 * r5;
  const double B = r3 + s * C;
  const double A = r2 + s1 * B;
  const double Cp = -r5;
  const double Bp = C + s * Cp;
  const double Ap = -B + s1 * Bp;
  deriv = (A + s * Ap) / (ds.t1 - ds.t0);
  return r1 + s * A;
}

}

// Heteroclinic of the reduced slow flow between the cut-off induced rest
// states, anchored at v(0) = anchor (the matched offset on the quiescent
// branch, zero on the excitatory branch).  The stored residual is the
// pointwise defect c v' + (phi(v) - gamma v) Theta(v) of the dense solution.
inline SlowHeteroclinic solve_reduced(const Kinetics& kin, SlowBranch branch,
                                      double c, const Cutoff& cut,
                                      double anchor,
                                      const SlowOptions& opt = {}) {
  if (!(c > 0.0))
    throw std::invalid_argument("slow flow needs a positive speed");

  const bool quiescent = branch == SlowBranch::Quiescent;
  const double v_left = quiescent ? 0.0 : cut.support_upper();
  const double v_right = quiescent ? cut.support_upper() : cut.support_lower();
  const double v_lo = std::min(v_left, v_right);
  const double v_hi = std::max(v_left, v_right);
  if (!(anchor > v_lo && anchor < v_hi))
    throw BadOrdering("anchor " + std::to_string(anchor) +
                      " is outside the traversed range (" +
                      std::to_string(v_lo) + ", " + std::to_string(v_hi) + ")");

  // The flow must cross the whole range in one direction; a sign change of
  // (phi - gamma v) Theta inside it would split the heteroclinic.
  const double expect = quiescent ? 1.0 : -1.0;
  const int nscan = 1001;
  std::vector<double> flow(nscan);
  double flow_max = 0.0;
  for (int j = 0; j < nscan; ++j) {
    const double v = v_lo + (v_hi - v_lo) * (j + 1) / (nscan + 1);
    flow[static_cast<size_t>(j)] = slow_flow(kin, branch, cut, c, v);
    flow_max = std::max(flow_max, std::fabs(flow[static_cast<size_t>(j)]));
  }
  for (int j = 0; j < nscan; ++j)
    if (flow[static_cast<size_t>(j)] * expect < -1e-12 * flow_max)
      throw VectorFieldSignError(
          "reduced flow reverses at v = " +
          std::to_string(v_lo + (v_hi - v_lo) * (j + 1) / (nscan + 1)));

  // Linearized approach rates at the two rest states.  The interior end of
  // the quiescent branch is a genuine equilibrium of the kinetics; every
  // other end is manufactured by the cut-off, whose roll-off meets zero
  // with slope 1/width.
  double rate_left, rate_right;
  if (quiescent) {
    const double u0 = detail::branch_value(kin, branch, 0.0);
    rate_left = (kin.gamma - 1.0 / kin.df(u0)) / c;
    const double ge = detail::branch_value(kin, branch, v_right) -
                      kin.gamma * v_right;
    if (!(ge < 0.0))
      throw VectorFieldSignError("quiescent flow does not push toward the "
                                 "upper support edge");
    rate_right = -ge / (c * cut.width);
  } else {
    const double gl = detail::branch_value(kin, branch, v_left) -
                      kin.gamma * v_left;
    const double gr = detail::branch_value(kin, branch, v_right) -
                      kin.gamma * v_right;
    if (!(gl > 0.0) || !(gr > 0.0))
      throw VectorFieldSignError("excitatory flow does not traverse "
                                 "downward across the plateau");
    rate_left = gl / (c * cut.width);
    rate_right = gr / (c * cut.width);
  }
  if (!(rate_left > 0.0) || !(rate_right > 0.0))
    throw VectorFieldSignError("nonhyperbolic rest state of the reduced flow");

  int i0 = 0;
  const Grid grid =
      detail::make_slow_grid(rate_left, rate_right, opt.span, opt.pad, opt.n, i0);

  // Integrate from the anchor toward both ends, stopping once the state is
  // within 1e-12 of the rest value; past that point the exact linearized
  // tail continues the solution to the grid ends.
  OdeOptions oo;
  oo.rtol = opt.ode_rtol;
  oo.atol = opt.ode_atol;
  const OdeRhs rhs = [&](double, const double* y, double* dy) {
    dy[0] = slow_flow(kin, branch, cut, c, y[0]);
  };
  const double approach = 1e-12;
  std::vector<OdeEvent> ev_r(1), ev_l(1);
  ev_r[0].f = [&](double, const std::vector<double>& y) {
    return std::fabs(v_right - y[0]) - approach;
  };
  ev_r[0].direction = -1;
  ev_l[0].f = [&](double, const std::vector<double>& y) {
    return std::fabs(v_left - y[0]) - approach;
  };
  ev_l[0].direction = -1;

  const OdeResult fwd =
      integrate(rhs, {anchor}, 0.0, grid.xi(grid.n - 1), oo, ev_r, true);
  const OdeResult bwd = integrate(rhs, {anchor}, 0.0, grid.xi(0), oo, ev_l, true);
  const double t_f = fwd.t_end, dev_f = v_right - fwd.y_end[0];
  const double t_b = bwd.t_end, dev_b = bwd.y_end[0] - v_left;

  SlowHeteroclinic sol;
  sol.branch = branch;
  sol.c = c;
  sol.grid = grid;
  sol.v.resize(static_cast<size_t>(grid.n));
  sol.u.resize(static_cast<size_t>(grid.n));
  std::vector<double> tmp;
  for (int k = 0; k < grid.n; ++k) {
    const double z = grid.xi(k);
    double val;
    if (z >= t_f) {
      val = v_right - dev_f * std::exp(-rate_right * (z - t_f));
    } else if (z <= t_b) {
      val = v_left + dev_b * std::exp(rate_left * (z - t_b));
    } else if (z >= 0.0) {
      fwd.eval(z, tmp);
      val = tmp[0];
    } else {
      bwd.eval(z, tmp);
      val = tmp[0];
    }
    sol.v[static_cast<size_t>(k)] = val;
  }
  sol.v[static_cast<size_t>(i0)] = anchor;
  for (int k = 0; k < grid.n; ++k)
    sol.u[static_cast<size_t>(k)] =
        detail::branch_value(kin, branch, sol.v[static_cast<size_t>(k)]);

  sol.v_left = v_left;
  sol.v_right = v_right;
  sol.u_left = detail::branch_value(kin, branch, v_left);
  sol.u_right = detail::branch_value(kin, branch, v_right);
  sol.rate_left = rate_left;
  sol.rate_right = rate_right;
  sol.anchor_index = i0;
  sol.anchor_value = anchor;
  sol.iterations = static_cast<int>(fwd.steps + bwd.steps);

  // Pointwise reduced-equation defect of the dense solution, measured with
  // the exact derivative of the continuous extension.
  double defect = 0.0;
  const int nprobe = 512;
  for (int j = 0; j < nprobe; ++j) {
    const double t = t_b + (t_f - t_b) * (j + 0.5) / nprobe;
    const OdeResult& res = t >= 0.0 ? fwd : bwd;
    double dv = 0.0;
    const double val = detail::dense_scalar(detail::locate_step(res, t), t, dv);
    const double g =
        detail::branch_value(kin, branch, val) - kin.gamma * val;
    defect = std::max(defect, std::fabs(c * dv + g * cut.value(val)));
  }
  sol.residual = defect;
  return sol;
}

// Two components of the traveling-wave residual in the slow variable:
//   comp_u = eps c u' - u + K_eps * u + f(u) - v
//   comp_v = c v' + (u - gamma v) Theta(v)
// At eps = 0 the nonlocal part collapses to the identity and comp_u
// reduces to f(u) - v.
struct SlowResidual {
  std::vector<double> comp_u, comp_v;
  double norm_u = 0.0, norm_v = 0.0;   // trapezoid L2 norms
  double total() const { return std::hypot(norm_u, norm_v); }
};

namespace detail {

inline double l2_norm(const Grid& g, const std::vector<double>& r) {
  double s = 0.0;
  for (int k = 0; k < g.n; ++k) {
    double q = r[static_cast<size_t>(k)] * r[static_cast<size_t>(k)];
    if (g.boundary == Boundary::Truncated && (k == 0 || k == g.n - 1))
      q *= 0.5;
    s += q;
  }
  return std::sqrt(s * g.h);
}

inline void slow_residual_parts(const Kinetics& kin, const GridKernel* gk,
                                const Profile& u, const Profile& v, double eps,
                                double c, const Cutoff& cut,
                                std::vector<double>& comp_u,
                                std::vector<double>& comp_v) {
  const int n = u.grid.n;
  const Profile dv = derivative(v);
  comp_u.resize(static_cast<size_t>(n));
  comp_v.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    comp_v[static_cast<size_t>(i)] =
        c * dv[i] + (u[i] - kin.gamma * v[i]) * cut.value(v[i]);
  if (eps > 0.0) {
    const Profile du = derivative(u);
    const Profile ku = convolve(*gk, u);
    for (int i = 0; i < n; ++i)
      comp_u[static_cast<size_t>(i)] =
          eps * c * du[i] - u[i] + ku[i] + kin.f(u[i]) - v[i];
  } else {
    for (int i = 0; i < n; ++i)
      comp_u[static_cast<size_t>(i)] = kin.f(u[i]) - v[i];
  }
}

}

inline SlowResidual slow_residual(const Kinetics& kin, const Kernel& ker,
                                  const Profile& u, const Profile& v,
                                  double eps, double c, const Cutoff& cut,
                                  double tail_tol = 1e-14) {
  if (!u.grid.same_layout(v.grid))
    throw std::invalid_argument("slow residual needs matching grids");
  SlowResidual r;
  if (eps > 0.0) {
    const GridKernel gk = make_grid_kernel(rescale(ker, eps), u.grid, tail_tol);
    detail::slow_residual_parts(kin, &gk, u, v, eps, c, cut, r.comp_u, r.comp_v);
  } else {
    detail::slow_residual_parts(kin, nullptr, u, v, eps, c, cut, r.comp_u,
                                r.comp_v);
  }
  r.norm_u = detail::l2_norm(u.grid, r.comp_u);
  r.norm_v = detail::l2_norm(u.grid, r.comp_v);
  return r;
}

// Green's function of the frozen fast operator
//   L w = eps c w' - w + K_eps * w + f'(u_h(zeta0)) w
// tabulated on the slow grid through the inverse transform of the
// reciprocal symbol.  The table is the exact discrete Green's row of the
// discretized operator (fourth-order derivative stencil plus the quadrature
// kernel band), so applying that operator to it returns a unit impulse to
// machine precision; the declared decay rates come from the real roots of
// the continuum symbol.
struct FrozenGreens {
  double zeta0 = 0.0;
  double eps = 0.0;
  double c = 0.0;
  double fprime = 0.0;           // f'(u_h) at the snapped base point
  Grid grid;                     // slow grid the table is aligned with
  int n_pad = 0;                 // periodic length used for the transform
  std::vector<double> g;         // Green's values at offsets k h, wrap order
  std::vector<std::complex<double>> ghat;   // 1/(h Delta) on the freq grid
  double symbol_zero = 0.0;      // Delta at frequency zero (equals f' when
                                 // the kernel has unit mass)
  double symbol_min = 0.0;       // min |Delta| over the frequency grid
  double integral = 0.0;         // h sum of g, the zero-frequency value
  double impulse_error = 0.0;    // sup defect of (L g) h against the impulse
  double rate_left = 0.0;        // exponential decay rates in zeta
  double rate_right = 0.0;

  double at(int offset) const {
    const int m = ((offset % n_pad) + n_pad) % n_pad;
    return g[static_cast<size_t>(m)];
  }
};

namespace detail {

// Laplace transform of the kernel at real argument s, the analytic
// continuation of the Fourier symbol used for decay rates.
inline double laplace_symbol(const Kernel& k, double s) {
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  switch (k.form) {
    case Kernel::Form::None:
      break;
    case Kernel::Form::Exponential: {
      if (std::fabs(s) >= k.rate) return inf;
      const double arg = -s * k.shift;
      if (arg > 700.0) return inf;
      total += k.amplitude * 2.0 * k.rate / (k.rate * k.rate - s * s) *
               std::exp(arg);
      break;
    }
    case Kernel::Form::Gaussian: {
      const double arg = 0.5 * k.sigma * k.sigma * s * s - s * k.shift;
      if (arg > 700.0) return inf;
      total += k.amplitude * k.sigma * std::sqrt(2.0 * M_PI) * std::exp(arg);
      break;
    }
    case Kernel::Form::Table:
      total += k.amplitude * k.table_integral([s](double x, double y) {
        return y * std::exp(-s * x);
      });
      break;
  }
  for (const auto& a : k.atoms) {
    const double arg = -s * a.position;
    if (arg > 700.0) return inf;
    total += a.weight * std::exp(arg);
  }
  return total;
}

// Real roots s_minus < 0 < s_plus of -1 + Laplace(K)(s) + f0 + c s, the
// spatial decay rates of the unit-scale Green's function.  Returns zero for
// a side where no root exists (kernels with no mass on that side).
inline void greens_rates(const Kernel& k, double f0, double c, double& s_plus,
                         double& s_minus) {
  const auto chi = [&](double s) {
    return -1.0 + laplace_symbol(k, s) + f0 + c * s;
  };
  s_plus = s_minus = 0.0;
  try {
    if (k.form == Kernel::Form::Exponential) {
      s_plus = brent(chi, 0.0, k.rate * (1.0 - 1e-9));
    } else {
      double b = 1.0;
      int guard = 0;
      while (chi(b) <= 0.0 && ++guard < 60) b *= 2.0;
      s_plus = brent(chi, 0.0, b);
    }
  } catch (const BracketError&) {
  }
  try {
    if (k.form == Kernel::Form::Exponential) {
      s_minus = brent(chi, -k.rate * (1.0 - 1e-9), 0.0);
    } else {
      double a = -1.0;
      int guard = 0;
      while (chi(a) <= 0.0 && ++guard < 60) a *= 2.0;
      s_minus = brent(chi, a, 0.0);
    }
  } catch (const BracketError&) {
  }
}

// Kernel band with the truncated tail mass folded onto the outermost
// weights, so the discrete symbol at frequency zero carries the exact mass.
inline std::vector<double> folded_band(const GridKernel& gk) {
  std::vector<double> w = gk.band;
  w.front() += gk.tail_right;
  w.back() += gk.tail_left;
  return w;
}

// Discrete symbol of the band on the padded frequency grid, computed with
// one FFT of the zero-embedded weights.
inline std::vector<std::complex<double>>
band_symbol(const std::vector<double>& w, int reach, int n_pad) {
  std::vector<std::complex<double>> a(static_cast<size_t>(n_pad), 0.0);
  for (int m = -reach; m <= reach; ++m)
    a[static_cast<size_t>(((m % n_pad) + n_pad) % n_pad)] =
        w[static_cast<size_t>(m + reach)];
  fft_forward(a);
  return a;
}

inline FrozenGreens
frozen_greens_impl(const Kinetics& kin, const Kernel& ker, const Profile& u_h,
                   double zeta0, double eps, double c,
                   const std::vector<double>& band, int reach,
                   const std::vector<std::complex<double>>& band_hat,
                   bool verify) {
  const Grid& grid = u_h.grid;
  const int n_pad = static_cast<int>(band_hat.size());
  const double h = grid.h;

  const int j0 = std::clamp(
      static_cast<int>(std::llround((zeta0 - grid.xi(0)) / h)), 0, grid.n - 1);
  const double f0 = kin.df(u_h[j0]);
  if (!(f0 < 0.0))
    throw SymbolZero("base point zeta0 = " + std::to_string(zeta0) +
                     " sits on an unstable branch segment, f'(u) = " +
                     std::to_string(f0));

  FrozenGreens fg;
  fg.zeta0 = grid.xi(j0);
  fg.eps = eps;
  fg.c = c;
  fg.fprime = f0;
  fg.grid = grid;
  fg.n_pad = n_pad;

  fg.ghat.resize(static_cast<size_t>(n_pad));
  double sym_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_pad; ++k) {
    const double th = 2.0 * M_PI * k / n_pad;
    const std::complex<double> d4(0.0, (8.0 * std::sin(th) -
                                        std::sin(2.0 * th)) / (6.0 * h));
    const std::complex<double> delta =
        band_hat[static_cast<size_t>(k)] + (f0 - 1.0) + eps * c * d4;
    if (k == 0) fg.symbol_zero = delta.real();
    sym_min = std::min(sym_min, std::abs(delta));
    fg.ghat[static_cast<size_t>(k)] = 1.0 / (h * delta);
  }
  fg.symbol_min = sym_min;
  if (sym_min < 1e-12)
    throw SymbolZero("frozen symbol vanishes, min |Delta| = " +
                     std::to_string(sym_min));

  std::vector<std::complex<double>> work = fg.ghat;
  fft_inverse(work);
  fg.g.resize(static_cast<size_t>(n_pad));
  double sum = 0.0;
  for (int j = 0; j < n_pad; ++j) {
    fg.g[static_cast<size_t>(j)] = work[static_cast<size_t>(j)].real();
    sum += fg.g[static_cast<size_t>(j)];
  }
  fg.integral = h * sum;

  double s_plus = 0.0, s_minus = 0.0;
  detail::greens_rates(ker, f0, c, s_plus, s_minus);
  fg.rate_left = s_plus / eps;
  fg.rate_right = -s_minus / eps;

  if (verify) {
    // Apply the discretized operator to the table in real space, with
    // circular wrap, and compare against the unit impulse at offset zero.
    const double d = eps * c / (12.0 * h);
    double err = 0.0;
    for (int j = 0; j < n_pad; ++j) {
      const auto gat = [&](int m) {
        return fg.g[static_cast<size_t>(((m % n_pad) + n_pad) % n_pad)];
      };
      double r = d * (-gat(j + 2) + 8.0 * gat(j + 1) - 8.0 * gat(j - 1) +
                      gat(j - 2)) +
                 (f0 - 1.0) * gat(j);
      for (int m = -reach; m <= reach; ++m)
        r += band[static_cast<size_t>(m + reach)] * gat(j - m);
      err = std::max(err, std::fabs(h * r - (j == 0 ? 1.0 : 0.0)));
    }
    fg.impulse_error = err;
  }
  return fg;
}

}

inline FrozenGreens frozen_greens(const Kinetics& kin, const Kernel& ker,
                                  const Profile& u_h, double zeta0, double eps,
                                  double c, double tail_tol = 1e-14) {
  if (!(eps > 0.0))
    throw std::invalid_argument("frozen Green's function needs eps > 0");
  const GridKernel gk = make_grid_kernel(rescale(ker, eps), u_h.grid, tail_tol);
  const std::vector<double> band = detail::folded_band(gk);
  const int n_pad = 2 * u_h.grid.n;
  const auto band_hat = detail::band_symbol(band, gk.reach, n_pad);
  return detail::frozen_greens_impl(kin, ker, u_h, zeta0, eps, c, band,
                                    gk.reach, band_hat, true);
}

// Frozen Green's tables on a lattice of base points, cubically interpolated
// in the base point when applied.  This realizes the approximate inverse
//   (N r)(zeta) = integral G_eps(zeta - s; zeta) r(s) ds
// of the fast operator with the coefficient frozen at the output point.
struct VaryingGreens {
  Grid grid;
  double eps = 0.0;
  double c = 0.0;
  std::vector<double> base;            // lattice base points, node-snapped
  std::vector<FrozenGreens> tables;
};

inline VaryingGreens make_varying_greens(const Kinetics& kin, const Kernel& ker,
                                         const Profile& u_h, double eps,
                                         double c, int lattice = 33,
                                         double tail_tol = 1e-14) {
  if (!(eps > 0.0))
    throw std::invalid_argument("frozen Green's function needs eps > 0");
  lattice = std::max(lattice, 4);
  VaryingGreens vg;
  vg.grid = u_h.grid;
  vg.eps = eps;
  vg.c = c;
  const GridKernel gk = make_grid_kernel(rescale(ker, eps), u_h.grid, tail_tol);
  const std::vector<double> band = detail::folded_band(gk);
  const int n_pad = 2 * u_h.grid.n;
  const auto band_hat = detail::band_symbol(band, gk.reach, n_pad);
  for (int j = 0; j < lattice; ++j) {
    const int idx = static_cast<int>(
        std::llround(static_cast<double>(j) * (u_h.grid.n - 1) / (lattice - 1)));
    vg.tables.push_back(detail::frozen_greens_impl(
        kin, ker, u_h, u_h.grid.xi(idx), eps, c, band, gk.reach, band_hat,
        false));
    vg.base.push_back(vg.tables.back().zeta0);
  }
  return vg;
}

inline Profile apply_greens(const VaryingGreens& vg, const Profile& r) {
  if (!r.grid.same_layout(vg.grid))
    throw std::invalid_argument("greens apply needs the build grid");
  const int n = vg.grid.n;
  const int n_pad = vg.tables.front().n_pad;
  const int count = static_cast<int>(vg.tables.size());

  // One forward transform of the input, one inverse per table; the output
  // then blends the per-table convolutions with base-point weights.
  std::vector<std::complex<double>> rhat(static_cast<size_t>(n_pad), 0.0);
  for (int i = 0; i < n; ++i) rhat[static_cast<size_t>(i)] = r[i];
  fft_forward(rhat);
  std::vector<std::vector<double>> conv(static_cast<size_t>(count));
  std::vector<std::complex<double>> work(static_cast<size_t>(n_pad));
  for (int q = 0; q < count; ++q) {
    const auto& tab = vg.tables[static_cast<size_t>(q)];
    for (int k = 0; k < n_pad; ++k)
      work[static_cast<size_t>(k)] =
          rhat[static_cast<size_t>(k)] * tab.ghat[static_cast<size_t>(k)];
    fft_inverse(work);
    conv[static_cast<size_t>(q)].resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      conv[static_cast<size_t>(q)][static_cast<size_t>(i)] =
          work[static_cast<size_t>(i)].real();
  }

  Profile out(vg.grid);
  for (int i = 0; i < n; ++i) {
    const double z = vg.grid.xi(i);
    int j = static_cast<int>(std::upper_bound(vg.base.begin(), vg.base.end(), z) -
                             vg.base.begin()) - 1;
    j = std::clamp(j, 0, count - 2);
    const int q0 = std::clamp(j - 1, 0, count - 4);
    double acc = 0.0;
    for (int q = q0; q < q0 + 4; ++q) {
      double w = 1.0;
      for (int p = q0; p < q0 + 4; ++p) {
        if (p == q) continue;
        w *= (z - vg.base[static_cast<size_t>(p)]) /
             (vg.base[static_cast<size_t>(q)] - vg.base[static_cast<size_t>(p)]);
      }
      acc += w * conv[static_cast<size_t>(q)][static_cast<size_t>(i)];
    }
    out[i] = vg.grid.h * acc;
  }
  return out;
}

inline Profile apply_greens(const Kinetics& kin, const Kernel& ker,
                            const Profile& r, const Profile& u_h, double eps,
                            double c, int lattice = 33) {
  return apply_greens(make_varying_greens(kin, ker, u_h, eps, c, lattice), r);
}

namespace detail {

inline Profile apply_fast_operator(const Kinetics& kin, const GridKernel& gk,
                                   const Profile& u_h, double eps, double c,
                                   const Profile& p) {
  const Profile dp = derivative(p);
  const Profile kp = convolve(gk, p);
  Profile out(p.grid);
  for (int i = 0; i < p.grid.n; ++i)
    out[i] = eps * c * dp[i] - p[i] + kp[i] + kin.df(u_h[i]) * p[i];
  return out;
}

}

// Linearization of the activator equation around the slow profile, applied
// to a decaying perturbation: eps c p' - p + K_eps * p + f'(u_h) p.
inline Profile apply_fast_operator(const Kinetics& kin, const Kernel& ker,
                                   const Profile& u_h, double eps, double c,
                                   const Profile& p, double tail_tol = 1e-14) {
  const GridKernel gk = make_grid_kernel(rescale(ker, eps), u_h.grid, tail_tol);
  return detail::apply_fast_operator(kin, gk, u_h, eps, c, p);
}

namespace detail {

inline std::string residual_trace(const std::vector<double>& hist) {
  std::ostringstream os;
  os << "residuals";
  for (double r : hist) os << " " << r;
  return os.str();
}

// Direct path: damped Newton on the interleaved (u, v) system with a banded
// LU of the discretized Jacobian.  The translation phase is fixed by
// replacing the recovery equation at the anchor node with a pin that keeps
// v there at the anchor value; the final residual check below covers the
// replaced equation as well.
inline void solve_slow_direct(const Kinetics& kin, const Kernel& ker,
                              const Cutoff& cut, const SlowHeteroclinic& base,
                              double eps, double c, const GridKernel& gk,
                              const SlowOptions& opt, std::vector<double>& u,
                              std::vector<double>& v,
                              SlowHeteroclinic& out) {
  const Grid& grid = base.grid;
  const int n = grid.n;
  const GridKernel gkj =
      make_grid_kernel(rescale(ker, eps), grid, opt.jac_tail_tol);
  const int mj = std::max(gkj.reach, 4);
  const int band = 2 * mj + 1;
  const int pin = 2 * base.anchor_index + 1;
  BandedMatrix J(2 * n, band, band);
  bool factored = false;
  double last_norm = std::numeric_limits<double>::infinity();

  Profile pu = base.u_profile();
  Profile pv = base.v_profile();
  std::vector<double> cu, cv;

  const NewtonEval eval = [&](const std::vector<double>& x, double,
                              std::vector<double>& F, double& g) {
    for (int i = 0; i < n; ++i) {
      pu[i] = x[static_cast<size_t>(2 * i)];
      pv[i] = x[static_cast<size_t>(2 * i + 1)];
    }
    slow_residual_parts(kin, &gk, pu, pv, eps, c, cut, cu, cv);
    F.resize(static_cast<size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
      F[static_cast<size_t>(2 * i)] = cu[static_cast<size_t>(i)];
      F[static_cast<size_t>(2 * i + 1)] = cv[static_cast<size_t>(i)];
    }
    g = 0.0;
  };
  const NewtonStep step = [&](const std::vector<double>& x, double,
                              const std::vector<double>& F, double,
                              std::vector<double>& dx, double& dp) {
    double fn = 0.0;
    for (double f : F) fn = std::max(fn, std::fabs(f));
    if (!factored || fn > 0.25 * last_norm) {
      J.clear();
      derivative_rows(grid, [&](int i, int j, double w) {
        J.at(2 * i, 2 * j) += eps * c * w;
      });
      derivative_rows(grid, [&](int i, int j, double w) {
        if (2 * i + 1 == pin) return;
        J.at(2 * i + 1, 2 * j + 1) += c * w;
      });
      for (int i = 0; i < n; ++i) {
        const double ui = x[static_cast<size_t>(2 * i)];
        const double vi = x[static_cast<size_t>(2 * i + 1)];
        const int jlo = std::max(0, i - mj), jhi = std::min(n - 1, i + mj);
        for (int j = jlo; j <= jhi; ++j)
          J.at(2 * i, 2 * j) += gkj.band[static_cast<size_t>(i - j + mj)];
        J.at(2 * i, 2 * i) += -1.0 + kin.df(ui);
        J.at(2 * i, 2 * i + 1) += -1.0;
        if (2 * i + 1 == pin) {
          J.at(pin, pin) = 1.0;
        } else {
          J.at(2 * i + 1, 2 * i) += cut.value(vi);
          J.at(2 * i + 1, 2 * i + 1) +=
              (ui - kin.gamma * vi) * cut.slope(vi) - kin.gamma * cut.value(vi);
        }
      }
      J.factor();
      factored = true;
    }
    last_norm = fn;
    std::vector<double> rhs = F;
    rhs[static_cast<size_t>(pin)] = 0.0;
    J.solve(rhs);
    dx.resize(static_cast<size_t>(2 * n));
    for (size_t i = 0; i < rhs.size(); ++i) dx[i] = -rhs[i];
    dp = 0.0;
  };

  std::vector<double> x(static_cast<size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<size_t>(2 * i)] = u[static_cast<size_t>(i)];
    x[static_cast<size_t>(2 * i + 1)] = v[static_cast<size_t>(i)];
  }
  double dummy = 0.0;
  NewtonOptions nopt;
  nopt.tol = opt.tol / (2.0 * std::sqrt(2.0 * grid.half_length) + 1.0);
  nopt.max_iter = opt.max_iter;
  const NewtonReport rep = newton_solve(x, dummy, eval, step, nopt);
  out.residual_history = rep.residual_history;
  out.iterations = rep.iterations;
  if (!rep.converged)
    throw IterationStalled(
        "slow persistence stalled at residual " +
        std::to_string(rep.residual_norm) + " after " +
        std::to_string(rep.iterations) + " iterations (" +
        residual_trace(rep.residual_history) + ")");
  for (int i = 0; i < n; ++i) {
    u[static_cast<size_t>(i)] = x[static_cast<size_t>(2 * i)];
    v[static_cast<size_t>(i)] = x[static_cast<size_t>(2 * i + 1)];
  }
}

// Series path: the quasi-Newton scheme with every coefficient frozen at the
// reduced solution.  The activator block is inverted by the frozen Green's
// preconditioner driven to convergence as a geometric series, the recovery
// block by one banded first-order solve after the triangular change of
// variables u~ = du - dv / f'(u_h); convergence is linear at a rate that
// shrinks with eps.
inline void solve_slow_series(const Kinetics& kin, const Kernel& ker,
                              const Cutoff& cut, const SlowHeteroclinic& base,
                              double eps, double c, const GridKernel& gk,
                              const SlowOptions& opt, std::vector<double>& u,
                              std::vector<double>& v,
                              SlowHeteroclinic& out) {
  const Grid& grid = base.grid;
  const int n = grid.n;
  const int i0 = base.anchor_index;
  const Profile ub = base.u_profile();
  const VaryingGreens vg =
      make_varying_greens(kin, ker, ub, eps, c, opt.lattice, opt.tail_tol);

  // Frozen recovery-block operator c d/dzeta + diag of the Theta terms plus
  // the triangular coupling Theta / f'.
  BandedMatrix Lh(n, 4, 4);
  derivative_rows(grid, [&](int i, int j, double w) {
    if (i == i0) return;
    Lh.at(i, j) += c * w;
  });
  for (int i = 0; i < n; ++i) {
    if (i == i0) {
      Lh.at(i0, i0) = 1.0;
      continue;
    }
    const double ub_i = base.u[static_cast<size_t>(i)];
    const double vb_i = base.v[static_cast<size_t>(i)];
    Lh.at(i, i) += (ub_i - kin.gamma * vb_i) * cut.slope(vb_i) -
                   kin.gamma * cut.value(vb_i) +
                   cut.value(vb_i) / kin.df(ub_i);
  }
  Lh.factor();

  Profile pu = base.u_profile();
  Profile pv = base.v_profile();
  std::vector<double> cu, cv;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      pu[i] = u[static_cast<size_t>(i)];
      pv[i] = v[static_cast<size_t>(i)];
    }
    slow_residual_parts(kin, &gk, pu, pv, eps, c, cut, cu, cv);
    const double rn =
        std::hypot(l2_norm(grid, cu), l2_norm(grid, cv));
    out.residual_history.push_back(rn);
    out.iterations = it;
    if (rn < opt.tol) return;
    if (!(rn < 2.0 * prev))
      throw IterationStalled("frozen-coefficient iteration diverges at "
                             "residual " + std::to_string(rn) + " (" +
                             residual_trace(out.residual_history) + ")");
    prev = rn;

    // Activator block: solve L u~ = -comp_u by preconditioned iteration.
    Profile b(grid);
    for (int i = 0; i < n; ++i) b[i] = -cu[static_cast<size_t>(i)];
    const double bn = l2_norm(grid, b.y);
    Profile ut = apply_greens(vg, b);
    double res_prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= opt.series_max; ++k) {
      Profile lr = apply_fast_operator(kin, gk, ub, eps, c, ut);
      Profile rem(grid);
      for (int i = 0; i < n; ++i) rem[i] = b[i] - lr[i];
      const double res = l2_norm(grid, rem.y);
      if (res <= 0.02 * bn || bn == 0.0) break;
      if (k == opt.series_max || res > 0.95 * res_prev)
        throw IterationStalled(
            "frozen Green's series stopped contracting at remainder " +
            std::to_string(res) + " of " + std::to_string(bn));
      res_prev = res;
      const Profile corr = apply_greens(vg, rem);
      for (int i = 0; i < n; ++i) ut[i] += corr[i];
    }

    // Recovery block, then undo the triangular change of variables.
    std::vector<double> rhs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      rhs[static_cast<size_t>(i)] =
          -cv[static_cast<size_t>(i)] -
          cut.value(base.v[static_cast<size_t>(i)]) * ut[i];
    rhs[static_cast<size_t>(i0)] = 0.0;
    Lh.solve(rhs);
    double upd = 0.0;
    for (int i = 0; i < n; ++i) {
      const double dv = rhs[static_cast<size_t>(i)];
      const double du = ut[i] + dv / kin.df(base.u[static_cast<size_t>(i)]);
      u[static_cast<size_t>(i)] += du;
      v[static_cast<size_t>(i)] += dv;
      upd = std::max(upd, std::max(std::fabs(du), std::fabs(dv)));
    }
    out.update_history.push_back(upd);
  }
  throw IterationStalled("slow persistence used all " +
                         std::to_string(opt.max_iter) + " iterations (" +
                         residual_trace(out.residual_history) + ")");
}

}

// Persists the reduced heteroclinic to eps > 0: starting from the branch
// profile, a Newton iteration drives the two-component residual below the
// tolerance, with the translation fixed by pinning the recovery component
// at the anchor node.  At eps = 0 the reduced solution is returned as is.
inline SlowHeteroclinic solve_slow(const Kinetics& kin, const Kernel& ker,
                                   SlowBranch branch, double eps, double c,
                                   const Cutoff& cut, double anchor,
                                   const SlowOptions& opt = {}) {
  if (eps == 0.0) return solve_reduced(kin, branch, c, cut, anchor, opt);

  SlowOptions padded = opt;
  padded.pad =
      opt.pad + 1.1 * rescale(ker, eps).support_radius(opt.tail_tol);
  const SlowHeteroclinic base =
      solve_reduced(kin, branch, c, cut, anchor, padded);
  const Grid& grid = base.grid;
  const GridKernel gk =
      make_grid_kernel(rescale(ker, eps), grid, opt.tail_tol);

  SlowHeteroclinic sol = base;
  sol.eps = eps;
  std::vector<double> u = base.u, v = base.v;
  if (opt.path == SlowPath::Direct)
    detail::solve_slow_direct(kin, ker, cut, base, eps, c, gk, opt, u, v, sol);
  else
    detail::solve_slow_series(kin, ker, cut, base, eps, c, gk, opt, u, v, sol);
  sol.u = u;
  sol.v = v;

  // Final, path-independent residual over every equation, including the one
  // the pin replaced.
  const SlowResidual rf =
      slow_residual(kin, ker, sol.u_profile(), sol.v_profile(), eps, c, cut,
                    opt.tail_tol);
  sol.residual = rf.total();
  if (!(sol.residual <= opt.tol))
    throw IterationStalled("persisted solution misses the residual contract: "
                           + std::to_string(sol.residual) + " > " +
                           std::to_string(opt.tol));

  Profile du(grid), dv(grid);
  for (int i = 0; i < grid.n; ++i) {
    du[i] = u[static_cast<size_t>(i)] - base.u[static_cast<size_t>(i)];
    dv[i] = v[static_cast<size_t>(i)] - base.v[static_cast<size_t>(i)];
  }
  sol.correction = std::hypot(weighted_norm(du, {}, NormOrder::H1),
                              weighted_norm(dv, {}, NormOrder::H1));
  return sol;
}

// Leading-order time spent between two recovery levels on the excited
// branch, where the cut-off is identically one:
//   T = c * integral of dv / (phi_e(v) - gamma v) from v_ef to v_be.
namespace detail {

inline void transit_checks(double v_be, double v_ef, double c,
                           const Kinetics& kin, const Cutoff& cut) {
  if (!(c > 0.0))
    throw std::invalid_argument("transit time needs a positive speed");
  if (v_ef > v_be)
    throw BadOrdering("transit runs downward, needs v_ef <= v_be, got (" +
                      std::to_string(v_be) + ", " + std::to_string(v_ef) + ")");
  if (v_be > cut.v_plus || v_ef < cut.v_minus)
    throw BadOrdering("transit limits (" + std::to_string(v_be) + ", " +
                      std::to_string(v_ef) + ") leave the cutoff plateau [" +
                      std::to_string(cut.v_minus) + ", " +
                      std::to_string(cut.v_plus) + "]");
  // The denominator must stay one-signed and away from zero on the path.
  const int m = 1001;
  double prev = 0.0;
  bool negative = false;
  for (int j = 0; j < m; ++j) {
    const double v = v_ef + (v_be - v_ef) * j / (m - 1.0);
    const double den =
        branch_value(kin, SlowBranch::Excitatory, v) - kin.gamma * v;
    if (std::fabs(den) < 1e-10 || (j > 0 && den * prev < 0.0))
      throw SlowFlowDegenerate("excited slow flow stagnates near v = " +
                               std::to_string(v));
    negative = negative || den < 0.0;
    prev = den;
  }
  if (negative)
    throw VectorFieldSignError("excited slow flow moves upward on (" +
                               std::to_string(v_ef) + ", " +
                               std::to_string(v_be) + ")");
}

}

inline double transit_time(double v_be, double v_ef, double c,
                           const Kinetics& kin, const Cutoff& cut) {
  detail::transit_checks(v_be, v_ef, c, kin, cut);
  if (v_be == v_ef) return 0.0;
  const OdeRhs rhs = [&](double t, const double*, double* dy) {
    dy[0] = c / (detail::branch_value(kin, SlowBranch::Excitatory, t) -
                 kin.gamma * t);
  };
  OdeOptions oo;
  oo.rtol = 1e-12;
  oo.atol = 1e-14;
  return integrate(rhs, {0.0}, v_ef, v_be, oo).y_end[0];
}

struct TransitPartials {
  double wrt_begin = 0.0;   // dT / dv_be
  double wrt_end = 0.0;     // dT / dv_ef
};

// The partials follow from differentiating the quadrature limits, so they
// are exact up to the branch-root tolerance.
inline TransitPartials transit_time_partials(double v_be, double v_ef,
                                             double c, const Kinetics& kin,
                                             const Cutoff& cut) {
  detail::transit_checks(v_be, v_ef, c, kin, cut);
  TransitPartials p;
  p.wrt_begin = c / (detail::branch_value(kin, SlowBranch::Excitatory, v_be) -
                     kin.gamma * v_be);
  p.wrt_end = -c / (detail::branch_value(kin, SlowBranch::Excitatory, v_ef) -
                    kin.gamma * v_ef);
  return p;
}

}

#endif
