#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nfhn/banded.hpp"
#include "nfhn/eigs.hpp"
#include "nfhn/newton.hpp"
#include "nfhn/ode.hpp"

using namespace nfhn;

namespace {

// deterministic pseudo-random doubles in [-1, 1]
struct Lcg {
  uint64_t s = 88172645463325252ULL;
  double next() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>((s >> 11) & 0xFFFFFFFFULL) / 2147483647.5 - 1.0;
  }
};

}

TEST_CASE("banded solve against a known solution", "[numerics]") {
  const int n = 200;
  BandedMatrix A(n, 1, 1);
  for (int i = 0; i < n; ++i) {
    A.at(i, i) = 2.1 + 0.01 * i;
    if (i > 0) A.at(i, i - 1) = -1.0;
    if (i < n - 1) A.at(i, i + 1) = -1.0;
  }
  std::vector<double> x_true(n), b(n, 0.0);
  for (int i = 0; i < n; ++i) x_true[i] = std::sin(0.1 * i) + 0.3;
  for (int i = 0; i < n; ++i) {
    b[i] = (2.1 + 0.01 * i) * x_true[i];
    if (i > 0) b[i] -= x_true[i - 1];
    if (i < n - 1) b[i] -= x_true[i + 1];
  }
  A.factor();
  std::vector<double> x = b;
  A.solve(x);
  double err = 0.0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::fabs(x[i] - x_true[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("banded solve matches a dense factorization", "[numerics]") {
  const int n = 120, kl = 3, ku = 2;
  BandedMatrix A(n, kl, ku);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  Lcg rng;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
      const double v = (i == j) ? 6.0 + rng.next() : rng.next();
      A.at(i, j) = v;
      D(i, j) = v;
    }
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = rng.next();

  A.factor();
  std::vector<double> x(rhs.data(), rhs.data() + n);
  A.solve(x);
  const Eigen::VectorXd ref = D.partialPivLu().solve(rhs);
  double err = 0.0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::fabs(x[i] - ref(i)));
  CHECK(err < 1e-11);

  // transposed solve
  std::vector<double> xt(rhs.data(), rhs.data() + n);
  A.solve(xt, true);
  const Eigen::VectorXd reft = D.transpose().partialPivLu().solve(rhs);
  err = 0.0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::fabs(xt[i] - reft(i)));
  CHECK(err < 1e-11);
}

TEST_CASE("banded guards", "[numerics]") {
  BandedMatrix A(10, 1, 1);
  CHECK_THROWS_AS(A.at(0, 5), std::out_of_range);
  CHECK_THROWS_AS(A.at(-1, 0), std::out_of_range);
  std::vector<double> b(10, 1.0);
  CHECK_THROWS_AS(A.solve(b), std::logic_error);
  // singular matrix (zero row)
  for (int i = 1; i < 10; ++i) A.at(i, i) = 1.0;
  CHECK_THROWS_AS(A.factor(), std::runtime_error);
}

TEST_CASE("bordered elimination equals the augmented dense solve",
          "[numerics]") {
  const int n = 6;
  Lcg rng;
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd bcol(n), rrow(n), F(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) J(i, j) = rng.next() + (i == j ? 4.0 : 0.0);
    bcol(i) = rng.next();
    rrow(i) = rng.next();
    F(i) = rng.next();
  }
  const double g = 0.37;

  Eigen::MatrixXd Aug(n + 1, n + 1);
  Aug.topLeftCorner(n, n) = J;
  Aug.topRightCorner(n, 1) = bcol;
  Aug.bottomLeftCorner(1, n) = rrow.transpose();
  Aug(n, n) = 0.0;
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = -F;
  rhs(n) = -g;
  const Eigen::VectorXd ref = Aug.partialPivLu().solve(rhs);

  const Eigen::VectorXd zF = J.partialPivLu().solve(F);
  const Eigen::VectorXd zb = J.partialPivLu().solve(bcol);
  std::vector<double> zFv(zF.data(), zF.data() + n),
      zbv(zb.data(), zb.data() + n), rv(rrow.data(), rrow.data() + n), dx;
  const double dp = bordered_eliminate(zFv, zbv, rv, g, dx);

  CHECK(std::fabs(dp - ref(n)) < 1e-11);
  for (int i = 0; i < n; ++i) CHECK(std::fabs(dx[i] - ref(i)) < 1e-11);
}

TEST_CASE("newton driver on plain and bordered problems", "[numerics]") {
  // sqrt(4) by plain Newton; parameter frozen
  {
    std::vector<double> x{3.0};
    double p = 0.0;
    const auto report = newton_solve(
        x, p,
        [](const std::vector<double>& xx, double, std::vector<double>& F,
           double& g) {
          F = {xx[0] * xx[0] - 4.0};
          g = 0.0;
        },
        [](const std::vector<double>& xx, double, const std::vector<double>& F,
           double, std::vector<double>& dx, double& dp) {
          dx = {-F[0] / (2.0 * xx[0])};
          dp = 0.0;
        });
    CHECK(report.converged);
    CHECK(report.iterations <= 8);
    CHECK(std::fabs(x[0] - 2.0) < 1e-12);
  }

  // damped Newton rescues the arctangent from a divergent start
  {
    std::vector<double> x{3.0};
    double p = 0.0;
    const auto report = newton_solve(
        x, p,
        [](const std::vector<double>& xx, double, std::vector<double>& F,
           double& g) {
          F = {std::atan(xx[0])};
          g = 0.0;
        },
        [](const std::vector<double>& xx, double, const std::vector<double>& F,
           double, std::vector<double>& dx, double& dp) {
          dx = {-F[0] * (1.0 + xx[0] * xx[0])};
          dp = 0.0;
        });
    CHECK(report.converged);
    CHECK(std::fabs(x[0]) < 1e-12);
  }

  // bordered: x^2 + p^2 = 5 with the constraint x = 2
  {
    std::vector<double> x{3.0};
    double p = 0.5;
    const auto report = newton_solve(
        x, p,
        [](const std::vector<double>& xx, double pp, std::vector<double>& F,
           double& g) {
          F = {xx[0] * xx[0] + pp * pp - 5.0};
          g = xx[0] - 2.0;
        },
        [](const std::vector<double>& xx, double pp,
           const std::vector<double>& F, double g, std::vector<double>& dx,
           double& dp) {
          const std::vector<double> zF{F[0] / (2.0 * xx[0])};
          const std::vector<double> zb{2.0 * pp / (2.0 * xx[0])};
          dp = bordered_eliminate(zF, zb, {1.0}, g, dx);
        });
    CHECK(report.converged);
    CHECK(std::fabs(x[0] - 2.0) < 1e-11);
    CHECK(std::fabs(p - 1.0) < 1e-11);
  }
}

TEST_CASE("adaptive integration accuracy", "[numerics]") {
  // linear decay
  OdeOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  const auto decay = [](double, const double* y, double* dy) { dy[0] = -y[0]; };
  const auto r1 = integrate(decay, {1.0}, 0.0, 2.0, opt);
  CHECK(std::fabs(r1.y_end[0] - std::exp(-2.0)) < 1e-9);

  // harmonic oscillator over many periods
  const auto osc = [](double, const double* y, double* dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  const auto r2 = integrate(osc, {1.0, 0.0}, 0.0, 20.0 * M_PI, opt);
  CHECK(std::fabs(r2.y_end[0] - 1.0) < 1e-7);
  CHECK(std::fabs(r2.y_end[1]) < 1e-7);

  // backward integration
  const auto grow = [](double, const double* y, double* dy) { dy[0] = y[0]; };
  const auto r3 = integrate(grow, {1.0}, 0.0, -1.0, opt);
  CHECK(std::fabs(r3.y_end[0] - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("dense output samples between steps", "[numerics]") {
  OdeOptions opt;
  opt.rtol = 1e-9;
  opt.atol = 1e-11;
  const auto rhs = [](double t, const double*, double* dy) {
    dy[0] = std::cos(t);
  };
  const auto res = integrate(rhs, {0.0}, 0.0, 10.0, opt, {}, true);
  REQUIRE(!res.dense.empty());
  double err = 0.0;
  for (int i = 0; i <= 500; ++i) {
    const double t = 10.0 * i / 500.0;
    err = std::max(err, std::fabs(res.eval1(t) - std::sin(t)));
  }
  CHECK(err < 1e-7);

  // backward dense output
  const auto resb = integrate(rhs, {std::sin(10.0)}, 10.0, 0.0, opt, {}, true);
  err = 0.0;
  for (int i = 0; i <= 500; ++i) {
    const double t = 10.0 * i / 500.0;
    err = std::max(err, std::fabs(resb.eval1(t) - std::sin(t)));
  }
  CHECK(err < 1e-7);
}

TEST_CASE("event location", "[numerics]") {
  OdeOptions opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-13;
  const auto decay = [](double, const double* y, double* dy) { dy[0] = -y[0]; };

  // falling crossing of y = 1/2 at t = ln 2
  OdeEvent ev;
  ev.f = [](double, const std::vector<double>& y) { return y[0] - 0.5; };
  ev.direction = -1;
  const auto res = integrate(decay, {1.0}, 0.0, 5.0, opt, {ev});
  REQUIRE(res.event_hit);
  CHECK(res.event_index == 0);
  CHECK(std::fabs(res.t_end - std::log(2.0)) < 1e-9);
  CHECK(std::fabs(res.y_end[0] - 0.5) < 1e-9);

  // a rising-only event never fires on a decaying solution
  OdeEvent up = ev;
  up.direction = +1;
  const auto res2 = integrate(decay, {1.0}, 0.0, 5.0, opt, {up});
  CHECK_FALSE(res2.event_hit);
  CHECK(std::fabs(res2.t_end - 5.0) < 1e-14);

  // two events: the earlier one wins
  OdeEvent late;
  late.f = [](double, const std::vector<double>& y) { return y[0] - 0.25; };
  const auto res3 = integrate(decay, {1.0}, 0.0, 5.0, opt, {late, ev});
  REQUIRE(res3.event_hit);
  CHECK(res3.event_index == 1);
}

TEST_CASE("shift-invert arnoldi finds edge eigenvalues", "[numerics]") {
  // second-difference matrix: eigenvalues 2 - 2 cos(k pi / (n+1))
  const int n = 400;
  BandedMatrix A(n, 1, 1);
  for (int i = 0; i < n; ++i) {
    A.at(i, i) = 2.0;
    if (i > 0) A.at(i, i - 1) = -1.0;
    if (i < n - 1) A.at(i, i + 1) = -1.0;
  }
  A.factor();
  const ShiftInvApply apply = [&](const Eigen::VectorXd& in,
                                  Eigen::VectorXd& out) {
    std::vector<double> b(in.data(), in.data() + n);
    A.solve(b);
    out = Eigen::Map<Eigen::VectorXd>(b.data(), n);
  };
  ArnoldiOptions aopt;
  aopt.krylov = 60;
  const auto pairs = shift_invert_arnoldi(n, apply, 0.0, aopt);
  REQUIRE(pairs.size() >= 4);
  for (int k = 1; k <= 4; ++k) {
    const double exact = 2.0 - 2.0 * std::cos(k * M_PI / (n + 1));
    CHECK(std::abs(pairs[k - 1].value - exact) < 1e-10);
    CHECK(std::fabs(pairs[k - 1].value.imag()) < 1e-12);
  }

  // eigenvector of the smallest mode is the first sine profile
  const auto& v = pairs[0].vector;
  std::complex<double> corr(0.0, 0.0);
  double nrm = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = std::sin((i + 1) * M_PI / (n + 1));
    corr += v(i) * s;
    nrm += s * s;
  }
  CHECK(std::abs(corr) / (std::sqrt(nrm) * v.norm()) > 0.999999);
}

TEST_CASE("arnoldi recovers a complex pair", "[numerics]") {
  const int n = 6;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A(0, 0) = 0.0;
  A(0, 1) = -1.0;
  A(1, 0) = 1.0;
  A(1, 1) = 0.0;               // rotation block: eigenvalues +-i
  for (int i = 2; i < n; ++i) A(i, i) = 2.0 + i;
  const double sigma = 0.1;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(
      A - sigma * Eigen::MatrixXd::Identity(n, n));
  const ShiftInvApply apply = [&](const Eigen::VectorXd& in,
                                  Eigen::VectorXd& out) { out = lu.solve(in); };
  const auto pairs = shift_invert_arnoldi(n, apply, sigma);
  REQUIRE(pairs.size() >= 2);
  const std::complex<double> i1(0.0, 1.0);
  const double d0 = std::min(std::abs(pairs[0].value - i1),
                             std::abs(pairs[0].value + i1));
  const double d1 = std::min(std::abs(pairs[1].value - i1),
                             std::abs(pairs[1].value + i1));
  CHECK(d0 < 1e-10);
  CHECK(d1 < 1e-10);
}
