#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "mcdet/channel.hpp"
#include "mcdet/rng.hpp"

namespace mcdet::psim {

/// Particle-based Brownian simulation of one reactive receiver with
/// first-order degradation in the bulk and reversible binding at the surface.
struct SimConfig {
  double dt = 5e-8;        // step size [s]
  double horizon = 0.0;    // total simulated time [s]
  std::uint64_t seed = 0;  // master seed; trial k uses stream (seed, k)
  enum class Release { kContinuous, kImpulsive };
  Release release = Release::kContinuous;
  double rate = 0.0;           // mu [molecules/s] for continuous release
  double impulse_count = 0.0;  // N released at t = 0 for impulsive mode
  Eigen::Vector3d source = Eigen::Vector3d::Zero();
  Eigen::Vector3d receiver_center = Eigen::Vector3d::Zero();
  channel::ReactionChannelParams receiver;
  /// Multiplier on the Erban-Chapman sticking probability; 1.0 is the plain
  /// flat-boundary rule kappa sqrt(pi dt / D).
  double binding_correction = 1.0;

  void validate() const;
};

struct ParticlePopulation {
  std::vector<Eigen::Vector3d> free_positions;
  /// Unit surface normals of occupied receptors; released molecules reappear
  /// at radius a(1 + 1e-6) along the stored normal.
  std::vector<Eigen::Vector3d> bound_normals;
  int bound_count() const { return static_cast<int>(bound_normals.size()); }
};

struct StepStats {
  int degraded = 0;
  int newly_bound = 0;
  int released = 0;
  int injected = 0;
};

/// Per-step constants derived once from a SimConfig.
struct StepKernel {
  double p_degrade = 0.0;
  double p_unbind = 0.0;
  double p_bind = 0.0;
  double sigma = 0.0;  // per-axis displacement std dev
  double radius = 0.0;
  double radius_sq = 0.0;
  double release_offset = 0.0;  // radius * (1 + 1e-6)
  double inject_mean = 0.0;     // Poisson mean per step (continuous mode)
  int capacity = 0;             // M
  Eigen::Vector3d source = Eigen::Vector3d::Zero();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
};

/// Builds the step kernel; the sticking probability comes from the homogenized
/// forward rate: p_bind = correction * [kf_star/(4 pi a^2)] * sqrt(pi dt / D).
StepKernel make_kernel(const SimConfig& cfg, const channel::DerivedChannelConstants& consts);

/// Advances the population by one step: (i) free-particle degradation,
/// (ii) Gaussian displacement, (iii) surface binding or radial reflection,
/// (iv) receptor release, (v) source injection (continuous mode).
StepStats step(ParticlePopulation& pop, const StepKernel& kernel, Xoshiro256pp& rng);

/// Bound-receptor counts at the requested times (sampled at the first step
/// boundary >= each time). Deterministic given (cfg.seed, trial_index).
std::vector<int> run_trial(const SimConfig& cfg, const channel::DerivedChannelConstants& consts,
                           const std::vector<double>& sample_times, std::uint64_t trial_index);

struct EnsembleMeans {
  std::vector<double> times;
  std::vector<double> mean_bound;     // ensemble average per sample time
  std::vector<double> std_error;      // standard error of the mean
  int trials = 0;
};

EnsembleMeans ensemble_mean(const SimConfig& cfg, const channel::DerivedChannelConstants& consts,
                            const std::vector<double>& sample_times, int n_trials,
                            unsigned workers);

/// Normalized histogram (total mass 1) of the bound count at one sample time.
std::vector<double> ensemble_histogram(const SimConfig& cfg,
                                       const channel::DerivedChannelConstants& consts,
                                       double sample_time, int n_trials, unsigned workers);

/// Total variation distance between a histogram and Poisson(mean), both
/// truncated-and-renormalized consistently: 0.5 * sum |p_i - q_i|.
double tv_distance_to_poisson(const std::vector<double>& histogram, double mean);

}  // namespace mcdet::psim
