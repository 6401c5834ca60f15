#pragma once

#include <Eigen/Core>
#include <vector>

#include "mcdet/numerics.hpp"

namespace mcdet::channel {

/// Diffusion/reaction constants and receiver geometry for one link class
/// (target->sensor or sensor->fusion-center). Units: micrometres and seconds;
/// forward rate in um^3 s^-1 molecule^-1.
struct ReactionChannelParams {
  double diffusion = 0.0;         // D [um^2/s]
  double k_forward = 0.0;         // k_f [um^3/s]
  double k_backward = 0.0;        // k_b [1/s]
  double k_degradation = 0.0;     // k_d [1/s]
  double receiver_radius = 0.0;   // a (sensor) or b (fusion center) [um]
  double receptor_count = 0.0;    // M
  double receptor_radius = 0.0;   // r_d (sensor) or r_F (fusion center) [um]

  /// Surface coverage lambda = M pi r^2 / (4 pi a^2).
  double coverage() const;
  /// Throws std::invalid_argument listing every violated invariant.
  void validate() const;
};

/// Constants derived once per link class and shared read-only.
struct DerivedChannelConstants {
  double lambda_coverage = 0.0;
  double phi = 0.0;
  double kf_star = 0.0;           // homogenized whole-sphere forward rate [um^3/s]
  numerics::CubicRoots roots;
};

DerivedChannelConstants derive_constants(const ReactionChannelParams& p);

/// Receptor activation probability P(t; dist): probability that a molecule
/// released at distance `dist` at t = 0 occupies a receptor at time t.
/// Conjugate-root cancellation leaves the value real; an imaginary residue
/// above 1e-9 of the term scale throws (numerics bug, not noise). The result
/// is clamped to [0, 1] only when within 1e-9 outside.
double activation_probability(double t, double dist, const ReactionChannelParams& p,
                              const DerivedChannelConstants& c);

/// Mean activated-receptor count at time t under constant secretion rate mu:
/// integral of mu P(tau) over (0, t].
double transient_mean(double t, double mu, double dist, const ReactionChannelParams& p,
                      const DerivedChannelConstants& c, double abs_tol = 1e-8,
                      double rel_tol = 1e-6);

/// Closed-form steady-state gain cached for repeated distance evaluation:
/// g(dist) = scale * exp(-decay * dist) / dist.
struct SteadyStateGain {
  double scale = 0.0;
  double decay = 0.0;
  double min_dist = 0.0;  // receiver radius; evaluation clamps below this
  double operator()(double dist) const {
    const double d = dist < min_dist ? min_dist : dist;
    return scale * std::exp(-decay * d) / d;
  }
};

/// Per-unit-rate asymptotic mean g(dist) such that m = mu * g (Lemma-1 form).
/// Requires k_degradation > 0 and dist > receiver_radius.
double steady_state_mean_g(double dist, const ReactionChannelParams& p,
                           const DerivedChannelConstants& c);

/// The same gain as a reusable closed-form evaluator.
SteadyStateGain steady_state_gain(const ReactionChannelParams& p,
                                  const DerivedChannelConstants& c);

/// Activation probability for the sensor->fusion-center link after an
/// impulsive release, evaluated at elapsed = T2 - T1 with that link's
/// parameters. Same contracts as activation_probability.
double fc_activation_probability(double elapsed, double dist, const ReactionChannelParams& fc_p,
                                 const DerivedChannelConstants& fc_c);

/// Target, sensor, and fusion-center positions with cached link distances.
struct NetworkLayout {
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  Eigen::Vector3d fusion_center = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> sensors;
  Eigen::ArrayXd target_sensor_dist;  // ||x_T - x_k||
  Eigen::ArrayXd sensor_fc_dist;      // ||x_k - x_F||

  int sensor_count() const { return static_cast<int>(sensors.size()); }

  /// Builds the layout and enforces: pairwise sensor spacing >= min_spacing,
  /// ||x_T - x_k|| > sensor_radius and ||x_k - x_F|| > fc_radius for all k.
  /// Throws std::invalid_argument listing all violations.
  static NetworkLayout create(const Eigen::Vector3d& target,
                              std::vector<Eigen::Vector3d> sensors,
                              const Eigen::Vector3d& fusion_center, double sensor_radius,
                              double fc_radius, double min_spacing);

  /// Recomputes cached distances for a new target position.
  void set_target(const Eigen::Vector3d& x);
};

}  // namespace mcdet::channel
