#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "mcdet/numerics.hpp"
#include "oracles.hpp"

using mcdet::numerics::Complex;
using mcdet::numerics::CubicRoots;

namespace {

double rel_err(Complex got, Complex want) {
  const double denom = std::abs(want);
  return denom > 0.0 ? std::abs(got - want) / denom : std::abs(got - want);
}

}  // namespace

TEST_CASE("erfcx: anchor values") {
  CHECK(mcdet::numerics::erfcx({0.0, 0.0}).real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mcdet::numerics::erfcx({0.0, 0.0}).imag() == doctest::Approx(0.0));
  // exp(0.25) erfc(0.5), high-precision reference
  CHECK(rel_err(mcdet::numerics::erfcx({0.5, 0.0}), {0.61569034419292587487, 0.0}) < 1e-13);
  // imaginary axis
  CHECK(rel_err(mcdet::numerics::erfcx({0.0, 2.0}),
                {0.018315638888734180294, -0.34002621706606620128}) < 1e-12);
}

TEST_CASE("erfcx: 0.5-lattice grid vs MPFR oracle within 1e-10") {
  double worst = 0.0;
  for (int i = -20; i <= 20; ++i) {
    for (int j = -20; j <= 20; ++j) {
      const Complex z(i * 0.5, j * 0.5);
      worst = std::max(worst, rel_err(mcdet::numerics::erfcx(z), oracles::erfcx_mpfr(z)));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("erfcx: random points vs oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Complex z(u(rng), u(rng));
    worst = std::max(worst, rel_err(mcdet::numerics::erfcx(z), oracles::erfcx_mpfr(z)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("erfcx: reflection identity on the negative real axis") {
  for (double x = 0.0; x <= 5.0; x += 0.103) {
    const double lhs = mcdet::numerics::erfcx({-x, 0.0}).real();
    const double rhs = 2.0 * std::exp(x * x) - mcdet::numerics::erfcx({x, 0.0}).real();
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
  }
}

TEST_CASE("erfcx: large real argument follows the asymptotic series") {
  for (double x : {1e3, 1e4, 1e6}) {
    const double got = mcdet::numerics::erfcx({x, 0.0}).real();
    const double lead = 1.0 / (x * std::sqrt(M_PI));
    CHECK(got == doctest::Approx(lead).epsilon(1e-5));
  }
}

TEST_CASE("erfcx: domain errors") {
  CHECK_THROWS_AS((void)mcdet::numerics::erfcx({-1000.0, 0.0}), std::overflow_error);
  CHECK_THROWS_AS((void)mcdet::numerics::erfcx({2e6, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)mcdet::numerics::erfcx({std::nan(""), 0.0}), std::invalid_argument);
}

TEST_CASE("w_stable: reductions and oracle value") {
  // W(n, 0) = erfc(n)
  CHECK(rel_err(mcdet::numerics::w_stable(1.0, {0.0, 0.0}), {0.15729920705028513066, 0.0}) <
        1e-13);
  // W(0, m) = erfcx(m) at m = 1
  CHECK(rel_err(mcdet::numerics::w_stable(0.0, {1.0, 0.0}),
                mcdet::numerics::erfcx({1.0, 0.0})) < 1e-14);
  // W(5, 2+3i) against the high-precision oracle value
  CHECK(rel_err(mcdet::numerics::w_stable(5.0, {2.0, 3.0}),
                {9.4247190998953045169e-13, -3.9717113156677286534e-13}) < 1e-11);
}

TEST_CASE("w_stable: agrees with the naive formula where it does not overflow") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> un(0.0, 3.0), um(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double n = un(rng);
    const Complex m(um(rng), um(rng));
    const Complex naive =
        std::exp(2.0 * n * m + m * m) * (mcdet::numerics::erfcx(Complex(n, 0.0) + m) *
                                         std::exp(-(Complex(n, 0.0) + m) * (Complex(n, 0.0) + m)));
    const Complex stable = mcdet::numerics::w_stable(n, m);
    CHECK(rel_err(stable, naive) < 1e-11);
  }
}

TEST_CASE("w_stable: conjugate symmetry W(n, conj m) = conj W(n, m)") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> un(0.0, 5.0), um(-4.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double n = un(rng);
    const Complex m(um(rng), um(rng));
    const Complex a = mcdet::numerics::w_stable(n, m);
    const Complex b = mcdet::numerics::w_stable(n, std::conj(m));
    CHECK(std::abs(a - std::conj(b)) <= 1e-12 * (std::abs(a) + 1e-300));
  }
}

TEST_CASE("cubic: factored integer roots") {
  const CubicRoots r = mcdet::numerics::solve_cubic_from_symmetric(6.0, 11.0, 6.0);
  CHECK(!r.degenerate);
  double roots[3] = {r.alpha.real(), r.beta.real(), r.gamma.real()};
  std::sort(roots, roots + 3);
  CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(roots[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(roots[2] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.alpha.imag() == 0.0);
}

TEST_CASE("cubic: all-zero symmetric functions flagged degenerate") {
  const CubicRoots r = mcdet::numerics::solve_cubic_from_symmetric(0.0, 0.0, 0.0);
  CHECK(r.degenerate);
  CHECK(std::abs(r.alpha) < 1e-12);
}

namespace {

void check_vieta(double s1, double s2, double s3) {
  const CubicRoots r = mcdet::numerics::solve_cubic_from_symmetric(s1, s2, s3);
  const Complex sum = r.alpha + r.beta + r.gamma;
  const Complex pair = r.alpha * r.beta + r.beta * r.gamma + r.gamma * r.alpha;
  const Complex prod = r.alpha * r.beta * r.gamma;
  const double scale = std::max({1.0, std::abs(s1), std::abs(s2), std::abs(s3)});
  CHECK(std::abs(sum - s1) <= 1e-9 * std::max(1.0, std::abs(s1)));
  CHECK(std::abs(pair - s2) <= 1e-9 * std::max(1.0, std::abs(s2)));
  CHECK(std::abs(prod - s3) <= 1e-9 * std::max(1.0, std::abs(s3)));
  // residual contract
  for (const Complex root : {r.alpha, r.beta, r.gamma}) {
    const Complex p = ((root - s1) * root + s2) * root - s3;
    CHECK(std::abs(p) <= 1e-9 * scale);
  }
  // non-real roots must occur as a conjugate pair
  int complex_count = 0;
  for (const Complex root : {r.alpha, r.beta, r.gamma})
    if (root.imag() != 0.0) ++complex_count;
  CHECK((complex_count == 0 || complex_count == 2));
}

}  // namespace

TEST_CASE("cubic: Vieta round-trip on random well-separated systems") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 300; ++i) {
    // build from random roots (one real + either two real or a conjugate pair)
    const double a = u(rng);
    if (i % 2 == 0) {
      const double b = u(rng), c = u(rng);
      check_vieta(a + b + c, a * b + b * c + c * a, a * b * c);
    } else {
      const double re = u(rng), im = std::abs(u(rng)) + 1.0;
      check_vieta(a + 2 * re, 2 * a * re + re * re + im * im, a * (re * re + im * im));
    }
  }
}

TEST_CASE("cubic: Table-1-scale coefficients (well-conditioned stiff case)") {
  // s-values of the kind produced by the channel constants: one large real
  // root and a small conjugate pair.
  check_vieta(154.96298586, 5e-05, 0.0057169);
  check_vieta(154.96298586, 20000.0, 2693010.0);
}

TEST_CASE("poisson_tail: closed-form anchors") {
  CHECK(mcdet::numerics::poisson_tail(0, 0.0) == 0.0);
  CHECK(mcdet::numerics::poisson_tail(7, 0.0) == 0.0);
  for (double zeta : {0.1, 1.0, 10.0}) {
    CHECK(mcdet::numerics::poisson_tail(0, zeta) ==
          doctest::Approx(-std::expm1(-zeta)).epsilon(1e-14));
  }
  CHECK(mcdet::numerics::poisson_tail(16, 10.0) ==
        doctest::Approx(0.027041609784801128039).epsilon(1e-13));
  CHECK(mcdet::numerics::poisson_tail(9, 5.0) ==
        doctest::Approx(0.031828057306204811737).epsilon(1e-13));
}

TEST_CASE("poisson_tail: matches direct summation to 1e-12 absolute") {
  for (int tau : {0, 1, 3, 16, 40, 120}) {
    for (double zeta : {0.05, 0.9, 5.0, 10.0, 55.0, 300.0, 499.0}) {
      const long double want = oracles::poisson_tail_sum(tau, zeta);
      CHECK(std::abs(mcdet::numerics::poisson_tail(tau, zeta) - static_cast<double>(want)) <
            1e-12);
    }
  }
}

TEST_CASE("poisson_tail: incomplete-gamma branch above zeta = 500") {
  for (int tau : {400, 550, 700}) {
    for (double zeta : {501.0, 600.0, 2000.0}) {
      const long double want = oracles::poisson_tail_sum(tau, zeta);
      CHECK(std::abs(mcdet::numerics::poisson_tail(tau, zeta) - static_cast<double>(want)) <
            1e-12);
    }
  }
  CHECK(mcdet::numerics::poisson_tail(16, 1e9) == 1.0);
}

TEST_CASE("poisson_tail: monotone decreasing in tau, increasing in zeta") {
  for (double zeta : {0.5, 3.0, 20.0}) {
    double prev = mcdet::numerics::poisson_tail(0, zeta);
    for (int tau = 1; tau < 40; ++tau) {
      const double cur = mcdet::numerics::poisson_tail(tau, zeta);
      CHECK(cur < prev);
      prev = cur;
    }
  }
  for (int tau : {0, 3, 10}) {
    double prev = mcdet::numerics::poisson_tail(tau, 0.01);
    for (double zeta = 0.5; zeta < 30.0; zeta += 0.5) {
      const double cur = mcdet::numerics::poisson_tail(tau, zeta);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("integrate_transient: elementary integrals") {
  const auto one = mcdet::numerics::integrate_transient([](double) { return 1.0; }, 1.0);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.error_estimate >= 0.0);
  const auto decay =
      mcdet::numerics::integrate_transient([](double t) { return std::exp(-t); }, 10.0);
  CHECK(decay.value == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-10));
  CHECK(decay.evaluations > 0);
}

TEST_CASE("integrate_transient: honours tighter tolerances") {
  const auto r = mcdet::numerics::integrate_transient(
      [](double t) { return std::sin(40.0 * t) * std::sin(40.0 * t); }, 3.0, 0.0, 1e-10);
  const double want = 1.5 - std::sin(240.0) / 160.0;  // int_0^3 sin^2(40 t) dt
  CHECK(std::abs(r.value - want) <= 1e-8 * want);
}

TEST_CASE("integrate_transient: budget exhaustion reported") {
  // cauchy-like spike too narrow to resolve within the panel budget at an
  // impossible tolerance
  auto nasty = [](double t) {
    const double d = t - 0.73;
    return 1.0 / (1e-28 + d * d);
  };
  CHECK_THROWS_AS((void)mcdet::numerics::integrate_transient(nasty, 1.0, 0.0, 1e-14),
                  mcdet::numerics::QuadratureError);
}
