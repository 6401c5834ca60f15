#include "mcdet/channel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mcdet::channel {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kImagResidueTol = 1e-9;

using numerics::Complex;

}  // namespace

double ReactionChannelParams::coverage() const {
  return receptor_count * receptor_radius * receptor_radius /
         (4.0 * receiver_radius * receiver_radius);
}

void ReactionChannelParams::validate() const {
  std::ostringstream bad;
  auto flag = [&](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  flag(diffusion > 0.0, "diffusion must be > 0");
  flag(k_forward >= 0.0, "k_forward must be >= 0");
  flag(k_backward >= 0.0, "k_backward must be >= 0");
  flag(k_degradation >= 0.0, "k_degradation must be >= 0");
  flag(receiver_radius > 0.0, "receiver_radius must be > 0");
  flag(receptor_count >= 0.0, "receptor_count must be >= 0");
  flag(receptor_radius >= 0.0, "receptor_radius must be >= 0");
  if (receiver_radius > 0.0) flag(coverage() < 1.0, "surface coverage lambda must be < 1");
  if (bad.tellp() > 0) throw std::invalid_argument("ReactionChannelParams: " + bad.str());
}

DerivedChannelConstants derive_constants(const ReactionChannelParams& p) {
  p.validate();
  DerivedChannelConstants c;
  c.lambda_coverage = p.coverage();
  const double a = p.receiver_radius, D = p.diffusion, kf = p.k_forward, rd = p.receptor_radius;
  const double M = p.receptor_count;
  const double num = M * rd * rd * (kf * a + 4.0 * kPi * D);
  const double den = a * a * (1.0 - c.lambda_coverage) * (kPi * rd * kf + 16.0 * kPi * D) + num;
  c.phi = den > 0.0 ? num / den : 0.0;
  c.kf_star = 4.0 * kPi * D * kf * c.phi / (kf * a * (1.0 - c.phi) + 4.0 * kPi * D);

  const double sd_a = std::sqrt(D) / a;
  const double kappa = 1.0 + c.kf_star / (4.0 * kPi * a * D);
  const double s1 = kappa * sd_a;
  const double s2 = p.k_backward - p.k_degradation;
  const double s3 = p.k_backward * sd_a - p.k_degradation * kappa * sd_a;
  c.roots = numerics::solve_cubic_from_symmetric(s1, s2, s3);
  return c;
}

namespace {

struct Bracket {
  Complex value;
  double term_scale;  // largest term magnitude, for the residue check
};

// Sum_cyc alpha f(alpha) / ((gamma-alpha)(alpha-beta)) with f supplied per root.
template <typename F>
Bracket cyclic_sum(const numerics::CubicRoots& r, F&& f) {
  const Complex al = r.alpha, be = r.beta, ga = r.gamma;
  const Complex ta = al * f(al) / ((ga - al) * (al - be));
  const Complex tb = be * f(be) / ((be - ga) * (al - be));
  const Complex tc = ga * f(ga) / ((be - ga) * (ga - al));
  const double scale = std::max({std::abs(ta), std::abs(tb), std::abs(tc), 1e-300});
  return {ta + tb + tc, scale};
}

double real_part_checked(const Bracket& b, const char* where) {
  if (std::abs(b.value.imag()) > kImagResidueTol * b.term_scale)
    throw std::logic_error(std::string(where) + ": imaginary residue exceeds tolerance");
  return b.value.real();
}

}  // namespace

double activation_probability(double t, double dist, const ReactionChannelParams& p,
                              const DerivedChannelConstants& c) {
  if (!(t > 0.0)) throw std::invalid_argument("activation_probability: t must be > 0");
  if (!(dist > p.receiver_radius))
    throw std::invalid_argument("activation_probability: dist must exceed receiver radius");
  if (c.kf_star == 0.0) return 0.0;
  if (c.roots.degenerate)
    throw std::domain_error("activation_probability: degenerate cubic roots");

  const double n = (dist - p.receiver_radius) / std::sqrt(4.0 * p.diffusion * t);
  if (n > 26.0) return 0.0;  // whole bracket carries exp(-n^2) < 1e-293
  const double sqt = std::sqrt(t);
  const Bracket b =
      cyclic_sum(c.roots, [&](Complex root) { return numerics::w_stable(n, root * sqt); });
  const double pref = c.kf_star * std::exp(-p.k_degradation * t) /
                      (4.0 * kPi * std::sqrt(p.diffusion) * p.receiver_radius * dist);
  double value = pref * real_part_checked(b, "activation_probability");
  if (value < 0.0) {
    if (value < -kImagResidueTol) throw std::logic_error("activation_probability: P < -1e-9");
    value = 0.0;
  }
  if (value > 1.0) {
    if (value > 1.0 + kImagResidueTol) throw std::logic_error("activation_probability: P > 1+1e-9");
    value = 1.0;
  }
  return value;
}

double transient_mean(double t, double mu, double dist, const ReactionChannelParams& p,
                      const DerivedChannelConstants& c, double abs_tol, double rel_tol) {
  if (mu < 0.0) throw std::invalid_argument("transient_mean: mu must be >= 0");
  if (mu == 0.0) return 0.0;
  const auto integrand = [&](double tau) { return activation_probability(tau, dist, p, c); };
  return mu * numerics::integrate_transient(integrand, t, abs_tol, rel_tol).value;
}

SteadyStateGain steady_state_gain(const ReactionChannelParams& p,
                                  const DerivedChannelConstants& c) {
  if (!(p.k_degradation > 0.0))
    throw std::domain_error("steady_state_gain: k_degradation must be > 0");
  SteadyStateGain gain;
  gain.decay = std::sqrt(p.k_degradation / p.diffusion);
  gain.min_dist = p.receiver_radius;
  if (c.kf_star == 0.0) return gain;  // scale 0
  if (c.roots.degenerate) throw std::domain_error("steady_state_gain: degenerate cubic roots");
  const double sqkd = std::sqrt(p.k_degradation);
  const Bracket b = cyclic_sum(
      c.roots, [&](Complex root) { return 1.0 / (root * sqkd + p.k_degradation); });
  const double bracket = real_part_checked(b, "steady_state_gain");
  gain.scale = c.kf_star * std::exp(p.receiver_radius * gain.decay) * bracket /
               (4.0 * kPi * std::sqrt(p.diffusion) * p.receiver_radius);
  return gain;
}

double steady_state_mean_g(double dist, const ReactionChannelParams& p,
                           const DerivedChannelConstants& c) {
  if (!(dist > p.receiver_radius))
    throw std::invalid_argument("steady_state_mean_g: dist must exceed receiver radius");
  return steady_state_gain(p, c)(dist);
}

double fc_activation_probability(double elapsed, double dist, const ReactionChannelParams& fc_p,
                                 const DerivedChannelConstants& fc_c) {
  if (!(elapsed > 0.0))
    throw std::invalid_argument("fc_activation_probability: elapsed must be > 0");
  return activation_probability(elapsed, dist, fc_p, fc_c);
}

NetworkLayout NetworkLayout::create(const Eigen::Vector3d& target,
                                    std::vector<Eigen::Vector3d> sensors,
                                    const Eigen::Vector3d& fusion_center, double sensor_radius,
                                    double fc_radius, double min_spacing) {
  std::ostringstream bad;
  const int k = static_cast<int>(sensors.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if ((sensors[i] - sensors[j]).norm() < min_spacing)
        bad << "sensors " << i << "," << j << " closer than min spacing; ";
    }
    if ((target - sensors[i]).norm() <= sensor_radius)
      bad << "target inside sensor " << i << "; ";
    if ((sensors[i] - fusion_center).norm() <= fc_radius)
      bad << "sensor " << i << " inside fusion center; ";
  }
  if (bad.tellp() > 0) throw std::invalid_argument("NetworkLayout: " + bad.str());

  NetworkLayout layout;
  layout.target = target;
  layout.fusion_center = fusion_center;
  layout.sensors = std::move(sensors);
  layout.target_sensor_dist.resize(k);
  layout.sensor_fc_dist.resize(k);
  for (int i = 0; i < k; ++i) {
    layout.target_sensor_dist[i] = (layout.target - layout.sensors[i]).norm();
    layout.sensor_fc_dist[i] = (layout.sensors[i] - layout.fusion_center).norm();
  }
  return layout;
}

void NetworkLayout::set_target(const Eigen::Vector3d& x) {
  target = x;
  for (int i = 0; i < sensor_count(); ++i)
    target_sensor_dist[i] = (target - sensors[i]).norm();
}

}  // namespace mcdet::channel
