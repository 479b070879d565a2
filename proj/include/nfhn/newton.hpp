#ifndef NFHN_NEWTON_HPP
#define NFHN_NEWTON_HPP

/*
 * Damped Newton driver over (state vector, scalar parameter) with an
 * optional scalar constraint, plus the two-solve elimination for bordered
 * systems
 *
 *     [ J  b ] [dx]   [-F]
 *     [ r' 0 ] [dp] = [-g]
 *
 * where the caller supplies z_F = J^{-1} F and z_b = J^{-1} b.  Line search
 * is Armijo backtracking on the squared residual.
 */

#include <cmath>
#include <functional>
#include <vector>

namespace nfhn {

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-12;          // on the residual infinity norm
  double armijo = 1e-4;
  int max_backtrack = 30;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;  // infinity norm at exit
  double step_norm = 0.0;      // infinity norm of the last correction
  std::vector<double> residual_history;  // norm entering each iteration
  std::vector<double> damping_history;   // accepted line-search fraction
};

// dp = (g - r . z_F) / (r . z_b), dx = -z_F - dp * z_b
inline double bordered_eliminate(const std::vector<double>& z_F,
                                 const std::vector<double>& z_b,
                                 const std::vector<double>& r, double g,
                                 std::vector<double>& dx) {
  double rzF = 0.0, rzb = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    rzF += r[i] * z_F[i];
    rzb += r[i] * z_b[i];
  }
  const double dp = (g - rzF) / rzb;
  dx.resize(z_F.size());
  for (size_t i = 0; i < z_F.size(); ++i) dx[i] = -z_F[i] - dp * z_b[i];
  return dp;
}

// eval fills the residual vector and the scalar constraint at (x, p);
// step produces the correction (dx, dp) from the current residual.
using NewtonEval = std::function<void(const std::vector<double>& x, double p,
                                      std::vector<double>& F, double& g)>;
using NewtonStep = std::function<void(const std::vector<double>& x, double p,
                                      const std::vector<double>& F, double g,
                                      std::vector<double>& dx, double& dp)>;

inline NewtonReport newton_solve(std::vector<double>& x, double& p,
                                 const NewtonEval& eval, const NewtonStep& step,
                                 const NewtonOptions& opt = {}) {
  NewtonReport rep;
  std::vector<double> F, Ft, dx, xt;
  double g = 0.0, gt = 0.0, dp = 0.0;

  const auto inf_norm = [](const std::vector<double>& v, double s) {
    double m = std::fabs(s);
    for (double a : v) m = std::max(m, std::fabs(a));
    return m;
  };
  const auto merit = [](const std::vector<double>& v, double s) {
    double m = s * s;
    for (double a : v) m += a * a;
    return 0.5 * m;
  };

  eval(x, p, F, g);
  for (rep.iterations = 0; rep.iterations < opt.max_iter; ++rep.iterations) {
    rep.residual_norm = inf_norm(F, g);
    if (rep.residual_norm < opt.tol) {
      rep.converged = true;
      return rep;
    }
    rep.residual_history.push_back(rep.residual_norm);
    step(x, p, F, g, dx, dp);
    const double m0 = merit(F, g);
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opt.max_backtrack; ++bt) {
      xt = x;
      for (size_t i = 0; i < x.size(); ++i) xt[i] += lambda * dx[i];
      const double pt = p + lambda * dp;
      eval(xt, pt, Ft, gt);
      if (merit(Ft, gt) <= (1.0 - opt.armijo * lambda) * m0) {
        x.swap(xt);
        p = pt;
        F.swap(Ft);
        g = gt;
        rep.step_norm = lambda * inf_norm(dx, dp);
        rep.damping_history.push_back(lambda);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      rep.damping_history.push_back(0.0);
      rep.residual_norm = inf_norm(F, g);
      return rep;   // stalled: no decrease along the Newton direction
    }
  }
  rep.residual_norm = inf_norm(F, g);
  rep.converged = rep.residual_norm < opt.tol;
  return rep;
}

}

#endif
