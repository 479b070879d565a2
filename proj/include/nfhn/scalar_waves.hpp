#ifndef NFHN_SCALAR_WAVES_HPP
#define NFHN_SCALAR_WAVES_HPP

/*
 * Heteroclinic traveling waves of the scalar nonlocal bistable equation
 *
 *     c u' - u + K * u + f(u) - v0 = 0
 *
 * at a frozen recovery value v0: the front connecting 1 to 0 at v0 = 0 and
 * the back connecting the quiescent branch to the excited branch at v0 =
 * v_b.  The unknown speed is paired with a phase condition pinning u at the
 * grid center, and the pair is solved as a bordered Newton iteration on a
 * banded Jacobian.  Linearizations about a converged wave expose the
 * operator action, its formal adjoint, and dense shift-invert eigenchecks
 * certifying the simple zero eigenvalue.  The back-speed curve c_b(v) is
 * continued in v to locate the matched offset with c_b(v_*) equal to the
 * front speed.
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

#include <Eigen/Dense>

#include "nfhn/banded.hpp"
#include "nfhn/convolution.hpp"
#include "nfhn/eigs.hpp"
#include "nfhn/grid.hpp"
#include "nfhn/kernel.hpp"
#include "nfhn/kinetics.hpp"
#include "nfhn/newton.hpp"
#include "nfhn/roots.hpp"

namespace nfhn {

struct NewtonDiverged : std::runtime_error {
  explicit NewtonDiverged(const std::string& w) : std::runtime_error(w) {}
};
struct WrongLimits : std::runtime_error {
  explicit WrongLimits(const std::string& w) : std::runtime_error(w) {}
};
struct NoMatch : std::runtime_error {
  explicit NoMatch(const std::string& w) : std::runtime_error(w) {}
};
struct EigSolverFailure : std::runtime_error {
  explicit EigSolverFailure(const std::string& w) : std::runtime_error(w) {}
};
struct InsufficientContinuationData : std::runtime_error {
  explicit InsufficientContinuationData(const std::string& w)
      : std::runtime_error(w) {}
};

enum class WaveKind { Front, Back };

struct ScalarWave {
  WaveKind kind = WaveKind::Front;
  Profile u;                   // profile with far-field values in left/right
  double c = 0.0;              // wave speed
  double v0 = 0.0;             // frozen recovery offset
  double limit_left = 0.0;     // intended value as xi -> -inf
  double limit_right = 0.0;    // intended value as xi -> +inf
  double residual_norm = 0.0;  // sup norm of the discrete wave equation
  int iterations = 0;          // Newton iterations spent
};

struct WaveOptions {
  double tol = 1e-10;        // Newton stop on the residual sup norm
  int max_iter = 50;
  double c_guess = 0.3;      // cold-start speed for fronts
  double tail_tol = 1e-14;   // kernel truncation in the discrete convolution
  double limit_tol = 1e-3;   // acceptance window for the far-field values
};

namespace detail {

// Residual of the traveling-wave equation at fixed speed and offset.
inline void wave_residual(const Kinetics& kin, const GridKernel& gk,
                          const Profile& u, double c, double v0,
                          std::vector<double>& F) {
  const Profile du = derivative(u);
  const Profile ku = convolve(gk, u);
  const int n = u.grid.n;
  F.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    F[i] = c * du[i] - u[i] + ku[i] + kin.f(u[i]) - v0;
}

// Banded Jacobian c D + (W - I) + diag f'(u) of the wave residual with the
// far-field values held fixed.
inline void fill_wave_jacobian(const Kinetics& kin, const GridKernel& gk,
                               const std::vector<double>& u, double c,
                               BandedMatrix& J) {
  const Grid& g = gk.grid;
  const int n = g.n;
  const int M = gk.reach;
  J.clear();
  derivative_rows(g, [&](int i, int j, double w) { J.at(i, j) += c * w; });
  for (int i = 0; i < n; ++i) {
    const int jlo = std::max(0, i - M), jhi = std::min(n - 1, i + M);
    for (int j = jlo; j <= jhi; ++j) J.at(i, j) += gk.band[i - j + M];
    J.at(i, i) += -1.0 + kin.df(u[static_cast<size_t>(i)]);
  }
}

struct WaveProblem {
  WaveKind kind = WaveKind::Front;
  double v0 = 0.0;
  double target = 0.5;        // phase value imposed at the grid center
  double limit_left = 0.0;
  double limit_right = 0.0;
};

inline std::string history_string(const NewtonReport& rep) {
  std::ostringstream os;
  os << "residuals";
  for (double r : rep.residual_history) os << " " << r;
  os << "; damping";
  for (double d : rep.damping_history) os << " " << d;
  return os.str();
}

inline ScalarWave solve_wave(const Kinetics& kin, const Kernel& ker,
                             const Grid& grid, const WaveProblem& pr,
                             Profile guess, double c_guess,
                             const WaveOptions& opt) {
  const GridKernel gk = make_grid_kernel(ker, grid, opt.tail_tol);
  const int n = grid.n;
  const int i0 = n / 2;       // xi = center sits exactly on this node
  const int band = std::max(gk.reach, 4);
  BandedMatrix J(n, band, band);
  bool factored = false;
  double last_norm = std::numeric_limits<double>::infinity();

  Profile work = guess;
  work.left = pr.limit_left;
  work.right = pr.limit_right;

  const NewtonEval eval = [&](const std::vector<double>& x, double p,
                              std::vector<double>& F, double& g) {
    work.y = x;
    wave_residual(kin, gk, work, p, pr.v0, F);
    g = x[static_cast<size_t>(i0)] - pr.target;
  };
  const NewtonStep step = [&](const std::vector<double>& x, double p,
                              const std::vector<double>& F, double g,
                              std::vector<double>& dx, double& dp) {
    double fn = std::fabs(g);
    for (double f : F) fn = std::max(fn, std::fabs(f));
    // Reuse the factorization only while the iteration keeps contracting
    // fast; a step that shrinks the residual by less than a factor of four
    // means the stored Jacobian has gone stale.
    if (!factored || fn > 0.25 * last_norm) {
      fill_wave_jacobian(kin, gk, x, p, J);
      J.factor();
      factored = true;
    }
    last_norm = fn;
    std::vector<double> zF = F;
    J.solve(zF);
    work.y = x;
    std::vector<double> zb = derivative(work).y;   // d(residual)/dc = u'
    J.solve(zb);
    // border row is the unit phase vector, so the elimination collapses to
    // the center entries of the two solves
    dp = (g - zF[static_cast<size_t>(i0)]) / zb[static_cast<size_t>(i0)];
    dx.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      dx[static_cast<size_t>(i)] =
          -zF[static_cast<size_t>(i)] - dp * zb[static_cast<size_t>(i)];
  };

  std::vector<double> x = guess.y;
  double c = c_guess;
  NewtonOptions nopt;
  nopt.tol = opt.tol;
  nopt.max_iter = opt.max_iter;
  const NewtonReport rep = newton_solve(x, c, eval, step, nopt);
  if (!rep.converged)
    throw NewtonDiverged("wave solve stalled at residual " +
                         std::to_string(rep.residual_norm) + " after " +
                         std::to_string(rep.iterations) + " iterations (" +
                         history_string(rep) + ")");

  ScalarWave wave;
  wave.kind = pr.kind;
  wave.iterations = rep.iterations;
  wave.u = work;
  wave.u.y = x;
  wave.u.left = pr.limit_left;
  wave.u.right = pr.limit_right;
  wave.c = c;
  wave.v0 = pr.v0;
  wave.limit_left = pr.limit_left;
  wave.limit_right = pr.limit_right;

  if (std::fabs(x.front() - pr.limit_left) > opt.limit_tol ||
      std::fabs(x.back() - pr.limit_right) > opt.limit_tol)
    throw WrongLimits("wave converged to limits (" +
                      std::to_string(x.front()) + ", " +
                      std::to_string(x.back()) + ") instead of (" +
                      std::to_string(pr.limit_left) + ", " +
                      std::to_string(pr.limit_right) + ")");

  std::vector<double> F;
  wave_residual(kin, gk, wave.u, c, pr.v0, F);
  double rn = 0.0;
  for (double f : F) rn = std::max(rn, std::fabs(f));
  wave.residual_norm = rn;
  if (rn > 1e-9)
    throw NewtonDiverged("wave accepted by the iteration but its residual " +
                         std::to_string(rn) + " misses the 1e-9 contract");
  return wave;
}

}

// Front solve with an explicit starting profile and speed.
inline ScalarWave solve_front(const Kinetics& kin, const Kernel& ker,
                              const Grid& grid, const Profile& guess,
                              double c_guess, const WaveOptions& opt = {}) {
  const BranchRoots r = branch_roots(kin, 0.0);
  detail::WaveProblem pr;
  pr.kind = WaveKind::Front;
  pr.v0 = 0.0;
  pr.target = 0.5 * (r.e + r.q);
  pr.limit_left = r.e;
  pr.limit_right = r.q;
  return detail::solve_wave(kin, ker, grid, pr, guess, c_guess, opt);
}

// Front solve from the default sigmoid guess.
inline ScalarWave solve_front(const Kinetics& kin, const Kernel& ker,
                              const Grid& grid, const WaveOptions& opt = {}) {
  const BranchRoots r = branch_roots(kin, 0.0);
  Profile guess(grid);
  for (int i = 0; i < grid.n; ++i)
    guess[i] = r.q + (r.e - r.q) * 0.5 * (1.0 - std::tanh(grid.xi(i) - grid.center));
  return solve_front(kin, ker, grid, guess, opt.c_guess, opt);
}

// Back solve with an explicit starting profile and speed.
inline ScalarWave solve_back(const Kinetics& kin, const Kernel& ker,
                             const Grid& grid, double v_b,
                             const Profile& guess, double c_guess,
                             const WaveOptions& opt = {}) {
  const BranchRoots r = branch_roots(kin, v_b);
  detail::WaveProblem pr;
  pr.kind = WaveKind::Back;
  pr.v0 = v_b;
  pr.target = 0.5 * (r.e + r.q);
  pr.limit_left = r.q;
  pr.limit_right = r.e;
  return detail::solve_wave(kin, ker, grid, pr, guess, c_guess, opt);
}

// Back solve from the default rising sigmoid; cold starts begin at rest
// speed zero since backs travel either way depending on the offset.
inline ScalarWave solve_back(const Kinetics& kin, const Kernel& ker,
                             const Grid& grid, double v_b,
                             const WaveOptions& opt = {}) {
  const BranchRoots r = branch_roots(kin, v_b);
  Profile guess(grid);
  for (int i = 0; i < grid.n; ++i)
    guess[i] = r.q + (r.e - r.q) * 0.5 * (1.0 + std::tanh(grid.xi(i) - grid.center));
  return solve_back(kin, ker, grid, v_b, guess, 0.0, opt);
}

// Linearization  L w = c w' - w + K * w + f'(u_*) w  about a converged
// wave, acting on perturbations that decay in both directions.
struct Linearization {
  Grid grid;
  double c = 0.0;
  std::vector<double> fprime;   // f'(u_*) on the nodes
  GridKernel op;                // kernel weights
  GridKernel op_reflected;      // reflected kernel for the adjoint

  Profile apply(const Profile& w) const {
    const Profile dw = derivative(w);
    const Profile kw = convolve(op, w);
    Profile out(grid);
    for (int i = 0; i < grid.n; ++i)
      out[i] = c * dw[i] - w[i] + kw[i] + fprime[static_cast<size_t>(i)] * w[i];
    return out;
  }

  // Formal adjoint -c w' - w + K~ * w + f'(u_*) w.
  Profile apply_adjoint(const Profile& w) const {
    const Profile dw = derivative(w);
    const Profile kw = convolve(op_reflected, w);
    Profile out(grid);
    for (int i = 0; i < grid.n; ++i)
      out[i] = -c * dw[i] - w[i] + kw[i] + fprime[static_cast<size_t>(i)] * w[i];
    return out;
  }

  // Dense matrix of the operator on the zero-extension perturbation space.
  Eigen::MatrixXd dense() const {
    const int n = grid.n;
    const int M = op.reach;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    detail::derivative_rows(grid,
                            [&](int i, int j, double w) { A(i, j) += c * w; });
    for (int i = 0; i < n; ++i) {
      const int jlo = std::max(0, i - M), jhi = std::min(n - 1, i + M);
      for (int j = jlo; j <= jhi; ++j) A(i, j) += op.band[i - j + M];
      A(i, i) += -1.0 + fprime[static_cast<size_t>(i)];
    }
    return A;
  }
};

inline Linearization linearize(const ScalarWave& wave, const Kinetics& kin,
                               const Kernel& ker,
                               const WaveOptions& opt = {}) {
  Linearization lin;
  lin.grid = wave.u.grid;
  lin.c = wave.c;
  lin.fprime.resize(static_cast<size_t>(lin.grid.n));
  for (int i = 0; i < lin.grid.n; ++i)
    lin.fprime[static_cast<size_t>(i)] = kin.df(wave.u[i]);
  lin.op = make_grid_kernel(ker, lin.grid, opt.tail_tol);
  lin.op_reflected = make_grid_kernel(reflected(ker), lin.grid, opt.tail_tol);
  return lin;
}

struct EigOptions {
  double sigma = 1e-4;          // shift separating zero from the inversion
  int krylov = 80;
  double ritz_tol = 1e-6;       // relative Ritz residual filter
  double zero_tol_factor = 1e-6;
  double gap_tol = 1e-3;
  double pairing_tol = 1e-6;
};

struct LinearizationReport {
  std::complex<double> lambda0;     // eigenvalue nearest zero
  double gap = 0.0;                 // magnitude of the next eigenvalue
  std::vector<double> kernel_vec;   // unit right eigenvector of lambda0
  std::vector<double> adjoint_vec;  // unit left eigenvector of lambda0
  double derivative_correlation = 0.0;  // alignment of kernel_vec with u'
  double pairing = 0.0;             // h * sum u'_i e*_i
  double op_norm = 0.0;             // max absolute row sum of the operator
  double zero_tol = 0.0;
  double gap_tol = 0.0;
  double pairing_tol = 0.0;

  bool pass() const {
    return std::abs(lambda0) < zero_tol && gap > gap_tol &&
           std::fabs(pairing) > pairing_tol;
  }
};

namespace detail {

// Smallest-magnitude converged Ritz pairs of a dense matrix through the
// shift-inverted Arnoldi iteration.
inline std::vector<EigPair> smallest_eigs(const Eigen::MatrixXd& A,
                                          double sigma, int krylov,
                                          double ritz_tol) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd S = A;
  for (int i = 0; i < n; ++i) S(i, i) -= sigma;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
  const ShiftInvApply apply = [&](const Eigen::VectorXd& in,
                                  Eigen::VectorXd& out) { out = lu.solve(in); };
  ArnoldiOptions aopt;
  aopt.krylov = std::min(krylov, n);
  std::vector<EigPair> pairs = shift_invert_arnoldi(n, apply, sigma, aopt);
  std::vector<EigPair> kept;
  for (auto& p : pairs) {
    if (!std::isfinite(p.value.real()) || !std::isfinite(p.value.imag()))
      continue;
    if (p.op_residual < ritz_tol) kept.push_back(std::move(p));
  }
  std::sort(kept.begin(), kept.end(), [](const EigPair& a, const EigPair& b) {
    return std::abs(a.value) < std::abs(b.value);
  });
  return kept;
}

}

inline LinearizationReport check_simple_zero(const ScalarWave& wave,
                                             const Kinetics& kin,
                                             const Kernel& ker,
                                             const EigOptions& eopt = {},
                                             const WaveOptions& wopt = {}) {
  const Linearization lin = linearize(wave, kin, ker, wopt);
  const int n = lin.grid.n;
  const Eigen::MatrixXd A = lin.dense();

  LinearizationReport rep;
  rep.op_norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  rep.zero_tol = eopt.zero_tol_factor * rep.op_norm;
  rep.gap_tol = eopt.gap_tol;
  rep.pairing_tol = eopt.pairing_tol;

  const auto right =
      detail::smallest_eigs(A, eopt.sigma, eopt.krylov, eopt.ritz_tol);
  if (right.size() < 2)
    throw EigSolverFailure("fewer than two converged eigenpairs near zero");
  rep.lambda0 = right[0].value;
  rep.gap = std::abs(right[1].value);

  const Profile du = derivative(wave.u);
  rep.kernel_vec.resize(static_cast<size_t>(n));
  double dot = 0.0, nx = 0.0, nd = 0.0;
  for (int i = 0; i < n; ++i) {
    const double xi = right[0].vector(i).real();
    rep.kernel_vec[static_cast<size_t>(i)] = xi;
    dot += xi * du[i];
    nx += xi * xi;
    nd += du[i] * du[i];
  }
  const double scale = (dot >= 0.0 ? 1.0 : -1.0) / std::sqrt(nx);
  for (double& x : rep.kernel_vec) x *= scale;
  rep.derivative_correlation = std::fabs(dot) / std::sqrt(nx * nd);

  const auto left = detail::smallest_eigs(A.transpose(), eopt.sigma,
                                          eopt.krylov, eopt.ritz_tol);
  if (left.empty())
    throw EigSolverFailure("no converged adjoint eigenpair near zero");
  rep.adjoint_vec.resize(static_cast<size_t>(n));
  double pair = 0.0, ne = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ei = left[0].vector(i).real();
    rep.adjoint_vec[static_cast<size_t>(i)] = ei;
    pair += du[i] * ei;
    ne += ei * ei;
  }
  const double escale = (pair >= 0.0 ? 1.0 : -1.0) / std::sqrt(ne);
  for (double& e : rep.adjoint_vec) e *= escale;
  rep.pairing = std::fabs(pair) / std::sqrt(ne) * lin.grid.h;
  return rep;
}

// Sampled continuation record of the back-speed curve c_b(v).
struct BackBranch {
  std::vector<double> v;
  std::vector<double> c;
  std::vector<Profile> profiles;   // converged backs, warm-start material

  int nearest(double vq) const {
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < v.size(); ++i)
      if (std::fabs(v[i] - vq) < dist) {
        dist = std::fabs(v[i] - vq);
        best = static_cast<int>(i);
      }
    return best;
  }
};

// Sweep the back solve across [v_lo, v_hi] with warm starts, recording the
// speed curve.  Points that fail to converge are skipped.
inline BackBranch continue_back(const Kinetics& kin, const Kernel& ker,
                                const Grid& grid, double v_lo, double v_hi,
                                int samples, const WaveOptions& opt = {}) {
  BackBranch br;
  Profile warm;
  double c_warm = 0.0;
  bool have_warm = false;
  for (int s = 0; s < samples; ++s) {
    const double v =
        (samples == 1) ? v_lo : v_lo + (v_hi - v_lo) * s / (samples - 1.0);
    try {
      const ScalarWave w =
          have_warm ? solve_back(kin, ker, grid, v, warm, c_warm, opt)
                    : solve_back(kin, ker, grid, v, opt);
      br.v.push_back(v);
      br.c.push_back(w.c);
      br.profiles.push_back(w.u);
      warm = w.u;
      c_warm = w.c;
      have_warm = true;
    } catch (const NewtonDiverged&) {
    } catch (const WrongLimits&) {
    }
  }
  return br;
}

struct SpeedMatch {
  double v_star = 0.0;
  double c_star = 0.0;
  double mismatch = 0.0;       // |c_b(v_star) - c_star|
  ScalarWave front;
  ScalarWave back;
  BackBranch branch;           // scan samples gathered along the way
};

// Locate the back offset whose speed equals the front speed by scanning
// c_b(v) across the bistable range and root-finding on the bracket.
inline SpeedMatch speed_match(const Kinetics& kin, const Kernel& ker,
                              const Grid& grid, const WaveOptions& opt = {}) {
  SpeedMatch sm;
  sm.front = solve_front(kin, ker, grid, opt);
  sm.c_star = sm.front.c;

  const BistableRange range = bistable_range(kin);
  const double span = range.v_max - range.v_min;
  const double lo = range.v_min + 0.02 * span;
  const double hi = range.v_max - 0.02 * span;
  sm.branch = continue_back(kin, ker, grid, lo, hi, 8, opt);
  const BackBranch& br = sm.branch;
  if (br.v.size() < 2)
    throw NoMatch("back continuation produced fewer than two samples");

  int ib = -1;
  for (size_t i = 0; i + 1 < br.v.size(); ++i)
    if ((br.c[i] - sm.c_star) * (br.c[i + 1] - sm.c_star) <= 0.0) {
      ib = static_cast<int>(i);
      break;
    }
  if (ib < 0) {
    std::ostringstream os;
    os << "back speed never crosses the front speed " << sm.c_star
       << " on the scan: c_b in [" << *std::min_element(br.c.begin(), br.c.end())
       << ", " << *std::max_element(br.c.begin(), br.c.end()) << "]";
    throw NoMatch(os.str());
  }

  Profile warm = br.profiles[static_cast<size_t>(ib)];
  double c_warm = br.c[static_cast<size_t>(ib)];
  ScalarWave last;
  const auto fun = [&](double v) {
    last = solve_back(kin, ker, grid, v, warm, c_warm, opt);
    warm = last.u;
    c_warm = last.c;
    return last.c - sm.c_star;
  };
  const double v_star = brent(fun, br.v[static_cast<size_t>(ib)],
                              br.v[static_cast<size_t>(ib) + 1], 1e-13, 1e-11);
  sm.v_star = v_star;
  sm.back = solve_back(kin, ker, grid, v_star, warm, c_warm, opt);
  sm.mismatch = std::fabs(sm.back.c - sm.c_star);
  return sm;
}

struct DerivativeEstimate {
  double value = 0.0;    // Richardson-combined central difference
  double error = 0.0;    // step-halving error estimate
  double step = 0.0;
};

// Slope of the back-speed curve at v_b from fresh central-difference
// solves warm-started off the continuation record.  The default step is
// small because the speed curve steepens sharply toward the fold.
inline DerivativeEstimate dspeed_dvb(const Kinetics& kin, const Kernel& ker,
                                     const Grid& grid, const BackBranch& br,
                                     double v_b, double step = 1e-5,
                                     const WaveOptions& opt = {}) {
  if (br.v.empty())
    throw InsufficientContinuationData("continuation branch is empty");
  const double vmin = *std::min_element(br.v.begin(), br.v.end());
  const double vmax = *std::max_element(br.v.begin(), br.v.end());
  if (v_b < vmin - step || v_b > vmax + step)
    throw InsufficientContinuationData(
        "no continuation samples near v = " + std::to_string(v_b));
  const int near = br.nearest(v_b);
  Profile warm = br.profiles[static_cast<size_t>(near)];
  double c_warm = br.c[static_cast<size_t>(near)];
  // The finite differences divide solver noise by the step, so the
  // individual solves need residuals well below the requested tolerance.
  WaveOptions tight = opt;
  tight.tol = std::min(opt.tol, 1e-12);
  const auto speed = [&](double v) {
    const ScalarWave w = solve_back(kin, ker, grid, v, warm, c_warm, tight);
    warm = w.u;
    c_warm = w.c;
    return w.c;
  };
  const double d1 =
      (speed(v_b + step) - speed(v_b - step)) / (2.0 * step);
  const double d2 =
      (speed(v_b + 0.5 * step) - speed(v_b - 0.5 * step)) / step;
  DerivativeEstimate est;
  est.value = (4.0 * d2 - d1) / 3.0;
  est.error = std::fabs(d2 - d1) / 3.0;
  est.step = step;
  return est;
}

}

#endif
