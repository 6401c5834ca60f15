#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "mcdet/channel.hpp"
#include "mcdet/detection.hpp"
#include "mcdet/particlesim.hpp"
#include "mcdet/rng.hpp"

namespace mcdet::harness {

/// Full experiment parameterization; every bundled config file carries the
/// complete canonical key set (see config::schema()).
struct ExperimentConfig {
  channel::ReactionChannelParams ns_channel;
  channel::ReactionChannelParams fc_channel;

  int sensor_count = 0;
  double square_edge = 0.0;   // [um], centered at the origin, z = 0
  double min_spacing = 0.0;   // [um]
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  Eigen::Vector3d fc_position = Eigen::Vector3d::Zero();

  double t1 = 0.0;  // sensor release time [s]
  double t2 = 0.0;  // fusion-center readout time [s]

  int tau1 = -1;            // -1: derive from omega1
  double omega1 = -1.0;     // local false-alarm bound
  int tau2 = -1;            // -1: derive from omega2_link
  double omega2_link = -1.0;
  double zeta0 = 0.0;
  double zeta_fc = 0.0;
  double n_secondary = 0.0;

  double mu = 0.0;  // H1 secretion rate [1/s]

  int grid_axis_points = 0;  // candidate positions per axis
  int grid_mu_points = 0;    // mu candidates {2 l mu / n : l = 1..n}

  std::uint64_t master_seed = 0;
  bool resample_topology = true;
  long calibration_trials = 0;
  long h0_eval_trials = 0;
  long h1_eval_trials = 0;
  std::vector<double> target_pfa;
  std::vector<int> sweep_k;
  double sweep_target_pfa = 0.0;

  double sim_dt = 0.0;
  long sim_trials = 0;
  double sim_mu = 0.0;
  double sim_distance = 0.0;  // source->receiver-center distance [um]
  std::vector<double> sim_kb;
  std::vector<double> sim_sample_times;
  double binding_correction = 1.0;

  /// Collects every violated invariant; throws std::invalid_argument with the
  /// full list when non-empty.
  void validate() const;
  int resolved_tau1() const;
  int resolved_tau2() const;
};

/// K uniform sensor positions in the square (z = 0); draws violating the
/// spacing or distance invariants are redrawn, with a bounded retry budget.
channel::NetworkLayout sample_topology(const ExperimentConfig& cfg, int sensor_count,
                                       Xoshiro256pp& rng);

/// One Monte Carlo draw of the fusion-center decision vector: Y_k Poisson at
/// each sensor, local UMP decision, Z_k Poisson at the FC, link decision.
detect::DecisionVector simulate_decision_vector(const detect::Scenario& scenario,
                                                const detect::DetectionModel& model,
                                                int tau1, int tau2, Xoshiro256pp& rng);

struct DetectorPoint {
  std::string detector;
  int sensors = 0;
  double target_pfa = 0.0;
  double achieved_pfa = 0.0;
  double achieved_pfa_ci = 0.0;
  double pm = 0.0;
  double pm_ci = 0.0;
  double tau3 = 0.0;
};

struct RocResult {
  std::vector<DetectorPoint> points;
  std::vector<std::string> warnings;
};

RocResult run_roc(const ExperimentConfig& cfg, unsigned workers);

struct SweepResult {
  std::vector<DetectorPoint> points;  // one per (detector, K)
  std::vector<std::string> warnings;
};

SweepResult run_sweep_k(const ExperimentConfig& cfg, unsigned workers);

struct CalibrationRow {
  std::string detector;
  double target_pfa = 0.0;
  double tau3 = 0.0;
  double calibration_pfa = 0.0;
  double ci_halfwidth = 0.0;
  long n_samples = 0;
  bool low_sample_warning = false;
};

std::vector<CalibrationRow> run_calibrate(const ExperimentConfig& cfg, unsigned workers);

struct ChannelValidationRow {
  double kb = 0.0;
  double t = 0.0;
  double analytical_mean = 0.0;
  double simulated_mean = 0.0;
  double rel_gap = 0.0;
  double asymptote = 0.0;
  double sim_std_error = 0.0;
};

std::vector<ChannelValidationRow> run_validate_channel(const ExperimentConfig& cfg,
                                                       unsigned workers);

struct PoissonValidationRow {
  double kb = 0.0;
  double t = 0.0;
  double analytic_mean = 0.0;
  double sim_mean = 0.0;
  double tv_distance = 0.0;
  long trials = 0;
};

std::vector<PoissonValidationRow> run_validate_poisson(const ExperimentConfig& cfg,
                                                       unsigned workers);

/// Fast-path G-LRT/G-LOD/GAD statistics for one decision vector; exposed so
/// tests can pin the accelerated path against detect::glrt_stat.
struct TrialStatistics {
  double gad = 0.0;
  double glrt = 0.0;
  double glod = 0.0;
};

class TrialEngine {
 public:
  TrialEngine(const ExperimentConfig& cfg, int sensor_count, std::uint64_t seed);
  ~TrialEngine();
  TrialEngine(const TrialEngine&) = delete;
  TrialEngine& operator=(const TrialEngine&) = delete;

  /// Statistics for one seeded trial under H1 (true scenario) or H0.
  TrialStatistics run_trial(std::uint64_t stream_id, bool under_h1) const;
  /// Same draw path, but also exposes model and decision vector (tests).
  TrialStatistics run_trial_verbose(std::uint64_t stream_id, bool under_h1,
                                    detect::DetectionModel* model_out,
                                    detect::DecisionVector* d_out) const;
  int sensor_count() const;

 private:
  struct Impl;
  Impl* impl_;
};

/// CSV writers; full round-trip precision (%.17g), fixed column order.
void write_roc_csv(const std::string& path, const RocResult& result);
void write_sweep_csv(const std::string& path, const SweepResult& result);
void write_channel_validation_csv(const std::string& path,
                                  const std::vector<ChannelValidationRow>& rows);
void write_poisson_validation_csv(const std::string& path,
                                  const std::vector<PoissonValidationRow>& rows);
void write_calibration_csv(const std::string& path, const std::vector<CalibrationRow>& rows);

}  // namespace mcdet::harness
