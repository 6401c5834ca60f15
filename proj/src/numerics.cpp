#include "mcdet/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace mcdet::numerics {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quadrature step for the Faddeeva evaluation. With h = 0.4 the rule error
// e^{-pi^2/h^2} ~ 5e-27 and node weights e^{-t^2} vanish past |t| ~ 6.8.
constexpr double kFadH = 0.4;
constexpr int kFadMid = 17;   // nodes (k + 1/2) h, k = 0..16
constexpr int kFadTrap = 17;  // nodes k h, k = 1..17 (plus t = 0)

struct FaddeevaTables {
  std::array<double, kFadMid> mid_t, mid_w;
  std::array<double, kFadTrap> trap_t, trap_w;
  FaddeevaTables() {
    for (int k = 0; k < kFadMid; ++k) {
      mid_t[k] = (k + 0.5) * kFadH;
      mid_w[k] = std::exp(-mid_t[k] * mid_t[k]);
    }
    for (int k = 0; k < kFadTrap; ++k) {
      trap_t[k] = (k + 1) * kFadH;
      trap_w[k] = std::exp(-trap_t[k] * trap_t[k]);
    }
  }
};
const FaddeevaTables kFad;

// w(zeta) for Im(zeta) >= 0.
Complex faddeeva_upper(Complex zeta) {
  const double x = zeta.real();
  const double fr = x / kFadH - std::floor(x / kFadH);
  const bool use_trap = fr >= 0.25 && fr < 0.75;
  Complex s;
  if (use_trap) {
    s = 1.0 / zeta;
    for (int k = 0; k < kFadTrap; ++k) {
      const double t = kFad.trap_t[k];
      s += kFad.trap_w[k] * (1.0 / (zeta - t) + 1.0 / (zeta + t));
    }
  } else {
    s = 0.0;
    for (int k = 0; k < kFadMid; ++k) {
      const double t = kFad.mid_t[k];
      s += kFad.mid_w[k] * (1.0 / (zeta - t) + 1.0 / (zeta + t));
    }
  }
  Complex out = Complex(0.0, kFadH / kPi) * s;
  // Residue correction, valid (and needed) only near the real axis.
  if (zeta.imag() < kPi / kFadH) {
    const Complex wexp = -zeta * zeta + Complex(0.0, 2.0 * kPi / kFadH) * zeta;
    if (wexp.real() > -45.0) {
      const Complex q = std::exp(Complex(0.0, 2.0 * kPi / kFadH) * zeta);
      if (use_trap)
        out -= 2.0 * std::exp(wexp) / (1.0 - q);
      else
        out += 2.0 * std::exp(wexp) / (1.0 + q);
    }
  }
  return out;
}

}  // namespace

Complex erfcx(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("erfcx: non-finite argument");
  if (std::abs(z) > 1e6) throw std::invalid_argument("erfcx: |z| > 1e6");
  if (z.real() >= 0.0) return faddeeva_upper(Complex(-z.imag(), z.real()));
  // erfcx(z) = 2 exp(z^2) - erfcx(-z)
  const Complex z2 = z * z;
  if (z2.real() > 709.0) throw std::overflow_error("erfcx: exp(z^2) overflows");
  return 2.0 * std::exp(z2) - faddeeva_upper(Complex(z.imag(), -z.real()));
}

Complex w_stable(double n, Complex m) {
  if (n < 0.0) throw std::invalid_argument("w_stable: n < 0");
  if (n > 26.0) return 0.0;  // exp(-n^2) < 1e-293; every W term is dead
  return std::exp(-n * n) * erfcx(Complex(n, 0.0) + m);
}

namespace {

Complex polish_root(Complex r, double s1, double s2, double s3) {
  for (int it = 0; it < 2; ++it) {
    const Complex p = ((r - s1) * r + s2) * r - s3;
    const Complex dp = (3.0 * r - 2.0 * s1) * r + s2;
    if (std::abs(dp) == 0.0) break;
    const Complex step = p / dp;
    r -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(r))) break;
  }
  return r;
}

}  // namespace

CubicRoots solve_cubic_from_symmetric(double s1, double s2, double s3) {
  if (!std::isfinite(s1) || !std::isfinite(s2) || !std::isfinite(s3))
    throw std::invalid_argument("solve_cubic_from_symmetric: non-finite input");

  // Depressed form: t = u + s1/3, u^3 + p u + q = 0.
  const double shift = s1 / 3.0;
  const double p = s2 - s1 * s1 / 3.0;
  const double q = -s3 + s2 * shift - 2.0 * shift * shift * shift;

  Complex u0, u1, u2;
  if (p == 0.0 && q == 0.0) {
    u0 = u1 = u2 = 0.0;
  } else {
    // Cardano in complex arithmetic; pick the cube root of largest magnitude
    // to keep w well away from zero.
    const Complex disc = std::sqrt(Complex(q * q / 4.0 + p * p * p / 27.0));
    Complex w = -q / 2.0 + disc;
    if (std::abs(-q / 2.0 - disc) > std::abs(w)) w = -q / 2.0 - disc;
    const Complex cr = std::pow(w, 1.0 / 3.0);
    const Complex omega(-0.5, std::sqrt(3.0) / 2.0);
    const auto root_from = [&](Complex c) { return c - p / (3.0 * c); };
    u0 = root_from(cr);
    u1 = root_from(cr * omega);
    u2 = root_from(cr * std::conj(omega));
  }

  CubicRoots out;
  out.alpha = polish_root(u0 + shift, s1, s2, s3);
  out.beta = polish_root(u1 + shift, s1, s2, s3);
  out.gamma = polish_root(u2 + shift, s1, s2, s3);

  // Real-coefficient cubic: either all roots real or one real + conjugate
  // pair. Snap near-real roots and re-pair the complex ones so downstream
  // conjugate-cancellation is exact.
  const double magmax = std::max({std::abs(out.alpha), std::abs(out.beta), std::abs(out.gamma)});
  auto snap = [&](Complex r) {
    return std::abs(r.imag()) <= 1e-12 * std::max(1.0, magmax) ? Complex(r.real(), 0.0) : r;
  };
  out.alpha = snap(out.alpha);
  out.beta = snap(out.beta);
  out.gamma = snap(out.gamma);
  Complex* roots[3] = {&out.alpha, &out.beta, &out.gamma};
  for (int i = 0; i < 3; ++i) {
    if (roots[i]->imag() != 0.0) {
      for (int j = i + 1; j < 3; ++j) {
        if (roots[j]->imag() != 0.0) *roots[j] = std::conj(*roots[i]);
      }
      break;
    }
  }

  const double sep = 1e-8 * std::max({std::abs(out.alpha), std::abs(out.beta), std::abs(out.gamma)});
  out.degenerate = std::abs(out.alpha - out.beta) < sep || std::abs(out.beta - out.gamma) < sep ||
                   std::abs(out.gamma - out.alpha) < sep;
  return out;
}

namespace {

double log_pmf(int k, double zeta) { return -zeta + k * std::log(zeta) - std::lgamma(k + 1.0); }

// Regularized lower incomplete gamma P(a, x); series for x < a+1, Lentz
// continued fraction for the complement otherwise.
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 2000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
  for (int i = 1; i < 2000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-17) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace

double poisson_tail(int tau, double zeta) {
  if (tau < 0) throw std::invalid_argument("poisson_tail: tau < 0");
  if (!(zeta >= 0.0)) throw std::invalid_argument("poisson_tail: zeta < 0 or NaN");
  if (zeta == 0.0) return 0.0;
  if (zeta > 500.0) {
    // P[Y > tau] = P(tau+1, zeta) (regularized lower incomplete gamma).
    return std::min(1.0, std::max(0.0, gamma_p(tau + 1.0, zeta)));
  }
  if (tau + 1 > zeta) {
    // Sum the tail directly: relative accuracy even when it is tiny.
    double term = std::exp(log_pmf(tau + 1, zeta));
    double sum = term, comp = 0.0;
    for (int i = tau + 2; i < tau + 2 + 3000; ++i) {
      term *= zeta / i;
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      if (term < sum * 1e-18 + 1e-320) break;
    }
    return std::min(1.0, sum);
  }
  // Complement of the CDF, summed with Kahan compensation.
  double term = std::exp(-zeta);
  double cdf = term, comp = 0.0;
  for (int i = 1; i <= tau; ++i) {
    term *= zeta / i;
    const double y = term - comp;
    const double t = cdf + y;
    comp = (t - cdf) - y;
    cdf = t;
  }
  return std::min(1.0, std::max(0.0, 1.0 - cdf));
}

double log_poisson_cdf(int tau, double zeta) {
  if (tau < 0) return -std::numeric_limits<double>::infinity();
  if (zeta == 0.0) return 0.0;
  // log-sum-exp over pmf(0..tau); the largest term is at min(tau, mode).
  const int kmax = std::min(tau, static_cast<int>(zeta));
  const double lead = log_pmf(kmax, zeta);
  double sum = 0.0;
  for (int k = std::max(0, kmax - 400); k <= std::min(tau, kmax + 400); ++k)
    sum += std::exp(log_pmf(k, zeta) - lead);
  // Tail of the CDF beyond the window is negligible at double precision.
  for (int k = kmax + 401; k <= tau && k < kmax + 2000; ++k) {
    const double d = std::exp(log_pmf(k, zeta) - lead);
    sum += d;
    if (d < 1e-20 * sum) break;
  }
  return lead + std::log(sum);
}

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGkNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr std::array<double, 8> kGkWeights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
  double integral;
  double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b, int& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kGkNodes[i]);
    fv[14 - i] = f(c + h * kGkNodes[i]);
  }
  fv[7] = f(c);
  evals += 15;
  double kronrod = kGkWeights[7] * fv[7];
  for (int i = 0; i < 7; ++i) kronrod += kGkWeights[i] * (fv[i] + fv[14 - i]);
  double gauss = kGaussWeights[3] * fv[7];
  for (int i = 0; i < 3; ++i) gauss += kGaussWeights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  kronrod *= h;
  gauss *= h;
  return {kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_transient(const std::function<double(double)>& f, double upper,
                                     double abs_tol, double rel_tol) {
  if (!(upper > 0.0)) throw std::invalid_argument("integrate_transient: upper must be > 0");

  struct Panel {
    double a, b, integral, error;
  };
  int evals = 0;
  // Seed with a graded partition toward 0 so short-time structure is found
  // even when `upper` is many decades larger.
  std::vector<Panel> panels;
  std::vector<double> cuts{0.0};
  for (double edge = upper * 1e-12; edge < upper * 0.99; edge *= 100.0) cuts.push_back(edge);
  cuts.push_back(upper);
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto r = gk15(f, cuts[i], cuts[i + 1], evals);
    panels.push_back({cuts[i], cuts[i + 1], r.integral, r.error});
    total += r.integral;
    total_err += r.error;
  }

  const int kMaxPanels = 4000;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (static_cast<int>(panels.size()) >= kMaxPanels)
      throw QuadratureError("integrate_transient: subdivision budget exhausted");
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i)
      if (panels[i].error > panels[worst].error) worst = i;
    const Panel split = panels[worst];
    const double mid = 0.5 * (split.a + split.b);
    if (mid <= split.a || mid >= split.b)
      throw QuadratureError("integrate_transient: interval collapsed before convergence");
    const auto left = gk15(f, split.a, mid, evals);
    const auto right = gk15(f, mid, split.b, evals);
    total += left.integral + right.integral - split.integral;
    total_err += left.error + right.error - split.error;
    panels[worst] = {split.a, mid, left.integral, left.error};
    panels.push_back({mid, split.b, right.integral, right.error});
  }

  // Recompute the totals once to shed accumulated cancellation.
  total = 0.0;
  total_err = 0.0;
  for (const auto& p : panels) {
    total += p.integral;
    total_err += p.error;
  }
  return {total, total_err, evals};
}

}  // namespace mcdet::numerics
