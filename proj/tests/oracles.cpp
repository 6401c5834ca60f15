#include "oracles.hpp"

#include <mpfr.h>

#include <cmath>
#include <stdexcept>

namespace oracles {

namespace {

constexpr mpfr_prec_t kPrec = 256;

// Minimal complex arithmetic over mpfr_t pairs; enough for the erf series.
struct MpComplex {
  mpfr_t re, im;
  MpComplex() {
    mpfr_init2(re, kPrec);
    mpfr_init2(im, kPrec);
    mpfr_set_zero(re, 1);
    mpfr_set_zero(im, 1);
  }
  MpComplex(const MpComplex&) = delete;
  MpComplex& operator=(const MpComplex&) = delete;
  ~MpComplex() {
    mpfr_clear(re);
    mpfr_clear(im);
  }
  void set(double r, double i) {
    mpfr_set_d(re, r, MPFR_RNDN);
    mpfr_set_d(im, i, MPFR_RNDN);
  }
  void set(const MpComplex& o) {
    mpfr_set(re, o.re, MPFR_RNDN);
    mpfr_set(im, o.im, MPFR_RNDN);
  }
};

void mul(MpComplex& out, const MpComplex& a, const MpComplex& b) {
  mpfr_t t1, t2, r;
  mpfr_inits2(kPrec, t1, t2, r, static_cast<mpfr_ptr>(nullptr));
  mpfr_mul(t1, a.re, b.re, MPFR_RNDN);
  mpfr_mul(t2, a.im, b.im, MPFR_RNDN);
  mpfr_sub(r, t1, t2, MPFR_RNDN);
  mpfr_mul(t1, a.re, b.im, MPFR_RNDN);
  mpfr_mul(t2, a.im, b.re, MPFR_RNDN);
  mpfr_add(out.im, t1, t2, MPFR_RNDN);
  mpfr_set(out.re, r, MPFR_RNDN);
  mpfr_clears(t1, t2, r, static_cast<mpfr_ptr>(nullptr));
}

void div_real(MpComplex& out, const MpComplex& a, long den) {
  mpfr_div_si(out.re, a.re, den, MPFR_RNDN);
  mpfr_div_si(out.im, a.im, den, MPFR_RNDN);
}

void add(MpComplex& out, const MpComplex& a) {
  mpfr_add(out.re, out.re, a.re, MPFR_RNDN);
  mpfr_add(out.im, out.im, a.im, MPFR_RNDN);
}

void cexp(MpComplex& out, const MpComplex& z) {
  mpfr_t mag, c, s;
  mpfr_inits2(kPrec, mag, c, s, static_cast<mpfr_ptr>(nullptr));
  mpfr_exp(mag, z.re, MPFR_RNDN);
  mpfr_sin_cos(s, c, z.im, MPFR_RNDN);
  mpfr_mul(out.re, mag, c, MPFR_RNDN);
  mpfr_mul(out.im, mag, s, MPFR_RNDN);
  mpfr_clears(mag, c, s, static_cast<mpfr_ptr>(nullptr));
}

double magnitude(const MpComplex& z) {
  mpfr_t mag;
  mpfr_init2(mag, kPrec);
  mpfr_hypot(mag, z.re, z.im, MPFR_RNDN);
  const double m = mpfr_get_d(mag, MPFR_RNDN);
  mpfr_clear(mag);
  return m;
}

}  // namespace

std::complex<double> erfcx_mpfr(std::complex<double> z) {
  // erf(z) = (2/sqrt(pi)) sum_n (-1)^n z^{2n+1} / (n! (2n+1));
  // erfcx(z) = exp(z^2) (1 - erf(z)). 256-bit mantissas absorb the series
  // cancellation for |z| <= ~15.
  if (std::abs(z) > 15.5) throw std::invalid_argument("erfcx_mpfr: |z| too large for the series");

  MpComplex zz, z2, sum, powered;
  zz.set(z.real(), z.imag());
  mul(z2, zz, zz);
  powered.set(zz);  // (-1)^n z^{2n+1} / n!, starting at n = 0
  sum.set(0.0, 0.0);
  add(sum, powered);
  for (long n = 1; n < 1500; ++n) {
    mul(powered, powered, z2);
    div_real(powered, powered, -n);
    MpComplex contrib;
    div_real(contrib, powered, 2 * n + 1);
    add(sum, contrib);
    if (n > static_cast<long>(std::norm(z)) + 8 && magnitude(contrib) < 1e-80) break;
  }

  mpfr_t spi;
  mpfr_init2(spi, kPrec);
  mpfr_const_pi(spi, MPFR_RNDN);
  mpfr_sqrt(spi, spi, MPFR_RNDN);
  mpfr_ui_div(spi, 2, spi, MPFR_RNDN);
  mpfr_mul(sum.re, sum.re, spi, MPFR_RNDN);
  mpfr_mul(sum.im, sum.im, spi, MPFR_RNDN);
  mpfr_clear(spi);

  MpComplex erfc;
  erfc.set(1.0, 0.0);
  mpfr_sub(erfc.re, erfc.re, sum.re, MPFR_RNDN);
  mpfr_neg(erfc.im, sum.im, MPFR_RNDN);

  MpComplex ez2, result;
  cexp(ez2, z2);
  mul(result, ez2, erfc);
  return {mpfr_get_d(result.re, MPFR_RNDN), mpfr_get_d(result.im, MPFR_RNDN)};
}

std::complex<double> w_mpfr(double n, std::complex<double> m) {
  const std::complex<double> e = erfcx_mpfr(std::complex<double>(n, 0.0) + m);
  return std::exp(-n * n) * e;
}

long double poisson_tail_sum(int tau, long double zeta) {
  if (zeta <= 0.0L) return 0.0L;
  long double pmf = expl(-zeta);
  long double cdf = pmf;
  for (int i = 1; i <= tau; ++i) {
    pmf *= zeta / i;
    cdf += pmf;
  }
  if (cdf < 0.5L) return 1.0L - cdf;
  long double term = pmf * zeta / (tau + 1);
  long double tail = term;
  for (int i = tau + 2; i < tau + 4000; ++i) {
    term *= zeta / i;
    tail += term;
    if (term < tail * 1e-25L) break;
  }
  return tail;
}

double bernoulli_vector_prob(const std::vector<std::uint8_t>& d, const std::vector<double>& rho) {
  double p = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) p *= d[i] ? rho[i] : 1.0 - rho[i];
  return p;
}

double bernoulli_log_ratio(const std::vector<std::uint8_t>& d, const std::vector<double>& rho1,
                           const std::vector<double>& rho0) {
  return std::log(bernoulli_vector_prob(d, rho1)) - std::log(bernoulli_vector_prob(d, rho0));
}

std::vector<std::vector<std::uint8_t>> all_decision_vectors(int k) {
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(1u << k);
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<std::uint8_t> d(k);
    for (int i = 0; i < k; ++i) d[i] = (mask >> i) & 1u;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace oracles
