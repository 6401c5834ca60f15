// Test-only reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace oracles {

/// erfcx(z) = exp(z^2) erfc(z) via the MPFR Taylor series of erf at 256-bit
/// precision. Slow; intended for grids of a few thousand points.
std::complex<double> erfcx_mpfr(std::complex<double> z);

/// W(n, m) = exp(2nm + m^2) erfc(n + m) through the MPFR oracle.
std::complex<double> w_mpfr(double n, std::complex<double> m);

/// Poisson upper tail P[Y > tau] by direct long-double summation of the pmf.
long double poisson_tail_sum(int tau, long double zeta);

/// Exhaustive joint log-likelihood ratio of a decision vector under
/// independent Bernoulli components (brute-force GAD reference).
double bernoulli_log_ratio(const std::vector<std::uint8_t>& d, const std::vector<double>& rho1,
                           const std::vector<double>& rho0);

/// Probability of one decision vector under independent Bernoulli(rho).
double bernoulli_vector_prob(const std::vector<std::uint8_t>& d, const std::vector<double>& rho);

/// All 2^K decision vectors, K <= 20.
std::vector<std::vector<std::uint8_t>> all_decision_vectors(int k);

}  // namespace oracles
