#include "mcdet/particlesim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mcdet/parallel.hpp"

namespace mcdet::psim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void SimConfig::validate() const {
  std::ostringstream bad;
  auto flag = [&](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  flag(dt > 0.0, "dt must be > 0");
  flag(horizon >= dt, "horizon must be >= dt");
  flag(rate >= 0.0, "rate must be >= 0");
  flag(impulse_count >= 0.0, "impulse_count must be >= 0");
  flag((source - receiver_center).norm() > receiver.receiver_radius,
       "source must lie outside the receiver");
  if (bad.tellp() > 0) throw std::invalid_argument("SimConfig: " + bad.str());
  receiver.validate();
}

StepKernel make_kernel(const SimConfig& cfg, const channel::DerivedChannelConstants& consts) {
  cfg.validate();
  StepKernel k;
  const auto& p = cfg.receiver;
  k.p_degrade = -std::expm1(-p.k_degradation * cfg.dt);
  k.p_unbind = -std::expm1(-p.k_backward * cfg.dt);
  k.sigma = std::sqrt(2.0 * p.diffusion * cfg.dt);
  const double kappa = consts.kf_star / (4.0 * kPi * p.receiver_radius * p.receiver_radius);
  k.p_bind = cfg.binding_correction * kappa * std::sqrt(kPi * cfg.dt / p.diffusion);
  if (k.p_bind > 1.0)
    throw std::invalid_argument("make_kernel: sticking probability exceeds 1; reduce dt");
  k.radius = p.receiver_radius;
  k.radius_sq = k.radius * k.radius;
  k.release_offset = k.radius * (1.0 + 1e-6);
  k.inject_mean = cfg.release == SimConfig::Release::kContinuous ? cfg.rate * cfg.dt : 0.0;
  k.capacity = static_cast<int>(p.receptor_count);
  k.source = cfg.source;
  k.center = cfg.receiver_center;
  return k;
}

StepStats step(ParticlePopulation& pop, const StepKernel& kernel, Xoshiro256pp& rng) {
  StepStats stats;
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto& free_pos = pop.free_positions;

  std::size_t i = 0;
  while (i < free_pos.size()) {
    // (i) degradation of free molecules
    if (kernel.p_degrade > 0.0 && rng.uniform() < kernel.p_degrade) {
      free_pos[i] = free_pos.back();
      free_pos.pop_back();
      ++stats.degraded;
      continue;
    }
    // (ii) displacement
    Eigen::Vector3d next = free_pos[i];
    next.x() += kernel.sigma * gauss(rng);
    next.y() += kernel.sigma * gauss(rng);
    next.z() += kernel.sigma * gauss(rng);
    const Eigen::Vector3d rel = next - kernel.center;
    const double r2 = rel.squaredNorm();
    if (r2 < kernel.radius_sq) {
      // (iii) proposed position inside the receiver: bind or reflect
      if (pop.bound_count() < kernel.capacity && rng.uniform() < kernel.p_bind) {
        const double r = std::sqrt(r2);
        pop.bound_normals.push_back(r > 0.0 ? Eigen::Vector3d(rel / r)
                                            : Eigen::Vector3d::UnitX());
        free_pos[i] = free_pos.back();
        free_pos.pop_back();
        ++stats.newly_bound;
        continue;
      }
      const double r = std::sqrt(r2);
      if (r > 0.0) {
        next = kernel.center + rel * ((2.0 * kernel.radius - r) / r);  // radial mirror
      } else {
        next = kernel.center + Eigen::Vector3d::UnitX() * kernel.radius;
      }
    }
    free_pos[i] = next;
    ++i;
  }

  // (iv) receptor release
  std::size_t b = 0;
  auto& bound = pop.bound_normals;
  while (b < bound.size()) {
    if (kernel.p_unbind > 0.0 && rng.uniform() < kernel.p_unbind) {
      free_pos.push_back(kernel.center + bound[b] * kernel.release_offset);
      bound[b] = bound.back();
      bound.pop_back();
      ++stats.released;
      continue;
    }
    ++b;
  }

  // (v) injection
  if (kernel.inject_mean > 0.0) {
    std::poisson_distribution<int> inject(kernel.inject_mean);
    stats.injected = inject(rng);
    for (int n = 0; n < stats.injected; ++n) free_pos.push_back(kernel.source);
  }
  return stats;
}

std::vector<int> run_trial(const SimConfig& cfg, const channel::DerivedChannelConstants& consts,
                           const std::vector<double>& sample_times, std::uint64_t trial_index) {
  const StepKernel kernel = make_kernel(cfg, consts);
  Xoshiro256pp rng = trial_stream(cfg.seed, trial_index);

  ParticlePopulation pop;
  if (cfg.release == SimConfig::Release::kImpulsive) {
    const int n = static_cast<int>(std::llround(cfg.impulse_count));
    pop.free_positions.assign(n, cfg.source);
  }

  const long total_steps = static_cast<long>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
  std::vector<long> sample_steps;
  sample_steps.reserve(sample_times.size());
  for (double t : sample_times)
    sample_steps.push_back(std::min<long>(total_steps, static_cast<long>(std::ceil(t / cfg.dt - 1e-9))));

  std::vector<int> series(sample_times.size(), 0);
  std::size_t next_sample = 0;
  while (next_sample < sample_steps.size() && sample_steps[next_sample] <= 0) {
    series[next_sample++] = pop.bound_count();
  }
  for (long s = 1; s <= total_steps && next_sample < sample_steps.size(); ++s) {
    step(pop, kernel, rng);
    while (next_sample < sample_steps.size() && sample_steps[next_sample] == s)
      series[next_sample++] = pop.bound_count();
  }
  return series;
}

EnsembleMeans ensemble_mean(const SimConfig& cfg, const channel::DerivedChannelConstants& consts,
                            const std::vector<double>& sample_times, int n_trials,
                            unsigned workers) {
  std::vector<std::vector<int>> per_trial(n_trials);
  parallel_for(n_trials, workers, [&](std::size_t t) {
    per_trial[t] = run_trial(cfg, consts, sample_times, t);
  });
  EnsembleMeans out;
  out.times = sample_times;
  out.trials = n_trials;
  out.mean_bound.assign(sample_times.size(), 0.0);
  out.std_error.assign(sample_times.size(), 0.0);
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    double sum = 0.0;
    for (const auto& tr : per_trial) sum += tr[i];
    const double mean = sum / n_trials;
    double ss = 0.0;
    for (const auto& tr : per_trial) ss += (tr[i] - mean) * (tr[i] - mean);
    out.mean_bound[i] = mean;
    out.std_error[i] = n_trials > 1 ? std::sqrt(ss / (n_trials - 1.0) / n_trials) : 0.0;
  }
  return out;
}

std::vector<double> ensemble_histogram(const SimConfig& cfg,
                                       const channel::DerivedChannelConstants& consts,
                                       double sample_time, int n_trials, unsigned workers) {
  std::vector<int> counts(n_trials, 0);
  const std::vector<double> times{sample_time};
  parallel_for(n_trials, workers, [&](std::size_t t) {
    counts[t] = run_trial(cfg, consts, times, t)[0];
  });
  const int top = *std::max_element(counts.begin(), counts.end());
  std::vector<double> hist(top + 1, 0.0);
  for (int c : counts) hist[c] += 1.0;
  for (double& h : hist) h /= n_trials;
  return hist;
}

double tv_distance_to_poisson(const std::vector<double>& histogram, double mean) {
  // Extend the support until the Poisson mass beyond it is negligible.
  std::size_t support = histogram.size();
  if (mean > 0.0)
    support = std::max<std::size_t>(support, static_cast<std::size_t>(mean + 12.0 * std::sqrt(mean) + 12.0));
  double pmf = std::exp(-mean);
  double tv = 0.0;
  for (std::size_t k = 0; k < support; ++k) {
    const double h = k < histogram.size() ? histogram[k] : 0.0;
    tv += std::abs(h - pmf);
    pmf *= mean / static_cast<double>(k + 1);
  }
  return 0.5 * tv;
}

}  // namespace mcdet::psim
