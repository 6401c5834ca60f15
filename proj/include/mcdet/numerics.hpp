#pragma once

#include <complex>
#include <functional>
#include <stdexcept>

namespace mcdet::numerics {

using Complex = std::complex<double>;

/// Scaled complementary error function erfcx(z) = exp(z^2) erfc(z) for complex
/// arguments. Relative accuracy is ~1e-13 over |Re z|, |Im z| <= 10 and stays
/// below 1e-10 out to |z| = 1e6.
///
/// Evaluated through the Faddeeva function w(iz) with a modified
/// midpoint/trapezoidal rule on the integral representation
///   w(zeta) = (i/pi) Int e^{-t^2} / (zeta - t) dt, Im zeta >= 0,
/// plus the residue correction 2 exp(-zeta^2) q / (1 +- q), q = e^{2 pi i zeta/h}.
/// The two rules alternate so quadrature nodes never sit near Re(zeta).
/// Re z < 0 goes through erfcx(z) = 2 exp(z^2) - erfcx(-z).
///
/// Throws std::overflow_error when the reflection term exp(z^2) exceeds double
/// range, and std::invalid_argument for |z| > 1e6 or non-finite input.
Complex erfcx(Complex z);

/// W(n, m) = exp(2nm + m^2) erfc(n + m) evaluated in the overflow-safe form
/// exp(-n^2) erfcx(n + m). Requires n >= 0.
Complex w_stable(double n, Complex m);

struct CubicRoots {
  Complex alpha;
  Complex beta;
  Complex gamma;
  /// Set when some pairwise root distance is below 1e-8 of the largest root
  /// magnitude; downstream formulas divide by root differences.
  bool degenerate = false;
};

/// Roots of t^3 - s1 t^2 + s2 t - s3 = 0, i.e. the monic cubic whose
/// elementary symmetric functions are (s1, s2, s3). Closed form on the
/// depressed cubic followed by one complex Newton polish per root.
/// Residuals satisfy |p(root)| <= 1e-9 * max(1, |s1|, |s2|, |s3|).
CubicRoots solve_cubic_from_symmetric(double s1, double s2, double s3);

/// Poisson upper tail H(tau, zeta) = P[Y > tau], Y ~ Poisson(zeta).
/// Complemented Kahan-compensated partial sums for zeta <= 500, regularized
/// lower incomplete gamma P(tau+1, zeta) above. Absolute error <= 1e-12.
double poisson_tail(int tau, double zeta);

/// log P[Y <= tau] without underflow; used where 1 - H rounds to zero.
double log_poisson_cdf(int tau, double zeta);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // reported achieved-error estimate
  int evaluations = 0;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive Gauss-Kronrod (G7,K15) quadrature of f over (0, upper]. Terminates
/// when the error estimate falls below max(abs_tol, rel_tol * |I|); throws
/// QuadratureError once the subdivision budget is exhausted.
QuadratureResult integrate_transient(const std::function<double(double)>& f, double upper,
                                     double abs_tol = 1e-8, double rel_tol = 1e-6);

}  // namespace mcdet::numerics
