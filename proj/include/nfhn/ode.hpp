#ifndef NFHN_ODE_HPP
#define NFHN_ODE_HPP

/*
 * Adaptive Dormand-Prince 5(4) integrator with a fourth-order continuous
 * extension, event location by bisection on the dense output, and support
 * for backward integration (t1 < t0).  Deterministic: no heuristics beyond
 * the standard step controller.
 */

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nfhn {

using OdeRhs = std::function<void(double t, const double* y, double* dy)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h0 = 0.0;        // 0 = pick from the interval length
  double hmax = std::numeric_limits<double>::infinity();
  long max_steps = 2000000;
};

struct OdeEvent {
  std::function<double(double t, const std::vector<double>& y)> f;
  int direction = 0;      // +1 rising zeros only, -1 falling, 0 both
};

// Per-step coefficients of the continuous extension
// y(t0 + s*dt) = r1 + s (r2 + (1-s)(r3 + s (r4 + (1-s) r5))).
struct DenseStep {
  double t0 = 0.0, t1 = 0.0;
  std::vector<double> r1, r2, r3, r4, r5;

  void eval(double t, std::vector<double>& out) const {
    const double s = (t - t0) / (t1 - t0);
    const double s1 = 1.0 - s;
    out.resize(r1.size());
    for (size_t i = 0; i < r1.size(); ++i)
      out[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
  }
};

struct OdeResult {
  double t_end = 0.0;
  std::vector<double> y_end;
  bool event_hit = false;
  int event_index = -1;
  long steps = 0;
  std::vector<DenseStep> dense;   // populated when store_dense is set

  // Dense sample at t (requires store_dense); clamps to the covered range.
  void eval(double t, std::vector<double>& out) const {
    if (dense.empty()) throw std::logic_error("dense output was not stored");
    size_t lo = 0, hi = dense.size() - 1;
    const bool fwd = dense.front().t1 > dense.front().t0;
    while (lo < hi) {
      const size_t mid = (lo + hi) / 2;
      const bool before = fwd ? (t > dense[mid].t1) : (t < dense[mid].t1);
      if (before)
        lo = mid + 1;
      else
        hi = mid;
    }
    dense[lo].eval(t, out);
  }
  double eval1(double t) const {
    std::vector<double> tmp;
    eval(t, tmp);
    return tmp[0];
  }
};

inline OdeResult integrate(const OdeRhs& rhs, std::vector<double> y0,
                           double t0, double t1, const OdeOptions& opt = {},
                           const std::vector<OdeEvent>& events = {},
                           bool store_dense = false) {
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                          a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                          a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                          a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                          a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                          e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                          e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;

  const size_t n = y0.size();
  OdeResult res;
  if (t1 == t0) {
    res.t_end = t0;
    res.y_end = y0;
    return res;
  }
  const double dir = (t1 > t0) ? 1.0 : -1.0;
  double t = t0;
  std::vector<double> y = std::move(y0);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n),
      ynew(n);
  std::vector<double> ev_prev(events.size()), ev_now(events.size());

  rhs(t, y.data(), k1.data());
  for (size_t e = 0; e < events.size(); ++e) ev_prev[e] = events[e].f(t, y);

  double h = opt.h0 != 0.0 ? std::fabs(opt.h0) : std::fabs(t1 - t0) / 100.0;
  h = std::min(h, opt.hmax);

  while (dir * (t1 - t) > 0.0) {
    if (++res.steps > opt.max_steps)
      throw std::runtime_error("ode integration exceeded the step budget");
    h = std::min(h, std::fabs(t1 - t));
    const double dt = dir * h;

    for (size_t i = 0; i < n; ++i) yt[i] = y[i] + dt * a21 * k1[i];
    rhs(t + dt / 5.0, yt.data(), k2.data());
    for (size_t i = 0; i < n; ++i)
      yt[i] = y[i] + dt * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + 3.0 * dt / 10.0, yt.data(), k3.data());
    for (size_t i = 0; i < n; ++i)
      yt[i] = y[i] + dt * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + 4.0 * dt / 5.0, yt.data(), k4.data());
    for (size_t i = 0; i < n; ++i)
      yt[i] = y[i] + dt * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + 8.0 * dt / 9.0, yt.data(), k5.data());
    for (size_t i = 0; i < n; ++i)
      yt[i] = y[i] + dt * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                           a64 * k4[i] + a65 * k5[i]);
    rhs(t + dt, yt.data(), k6.data());
    for (size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + dt * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                             a75 * k5[i] + a76 * k6[i]);
    rhs(t + dt, ynew.data(), k7.data());

    double err = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double ei = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                              e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    // accepted: build the continuous extension for this step
    DenseStep ds;
    ds.t0 = t;
    ds.t1 = t + dt;
    ds.r1 = y;
    ds.r2.resize(n);
    ds.r3.resize(n);
    ds.r4.resize(n);
    ds.r5.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const double ydiff = ynew[i] - y[i];
      const double bspl = dt * k1[i] - ydiff;
      ds.r2[i] = ydiff;
      ds.r3[i] = bspl;
      ds.r4[i] = ydiff - dt * k7[i] - bspl;
      ds.r5[i] = dt * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                       d6 * k6[i] + d7 * k7[i]);
    }

    // event check on the accepted interval
    const double t_next = t + dt;
    for (size_t e = 0; e < events.size(); ++e) {
      ev_now[e] = events[e].f(t_next, ynew);
      const bool rising = ev_prev[e] < 0.0 && ev_now[e] >= 0.0;
      const bool falling = ev_prev[e] > 0.0 && ev_now[e] <= 0.0;
      if ((rising && events[e].direction >= 0) ||
          (falling && events[e].direction <= 0)) {
        double lo = t, hi = t_next;
        std::vector<double> ymid;
        for (int it = 0; it < 100 && std::fabs(hi - lo) >
                                         1e-15 * (std::fabs(hi) + 1.0);
             ++it) {
          const double mid = 0.5 * (lo + hi);
          ds.eval(mid, ymid);
          const double em = events[e].f(mid, ymid);
          if ((em > 0.0) == (ev_now[e] > 0.0))
            hi = mid;
          else
            lo = mid;
        }
        ds.eval(hi, ymid);
        res.t_end = hi;
        res.y_end = ymid;
        res.event_hit = true;
        res.event_index = static_cast<int>(e);
        if (store_dense) res.dense.push_back(ds);
        return res;
      }
    }
    ev_prev = ev_now;

    if (store_dense) res.dense.push_back(std::move(ds));
    t = t_next;
    y.swap(ynew);
    k1.swap(k7);   // FSAL
    const double fac = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-16), -0.2)));
    h = std::min(h * fac, opt.hmax);
  }

  res.t_end = t;
  res.y_end = y;
  return res;
}

}

#endif
