#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "mcdet/channel.hpp"

namespace mcdet::detect {

/// Mean environmental molecule counts: zeta0 at every sensor, zeta_fc[k] for
/// the k-th secondary-molecule type at the fusion center.
struct NoiseModel {
  double zeta0 = 0.0;
  Eigen::ArrayXd zeta_fc;
};

struct Thresholds {
  int tau1 = 0;       // sensor count threshold
  int tau2 = 0;       // fusion-center link threshold
  double tau3 = 0.0;  // fusion-center statistic threshold
};

/// Hypothesis pair: H0 <=> mu == 0, H1 <=> mu > 0 with target position x_T.
struct Scenario {
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  double mu = 0.0;
  bool is_h1() const { return mu > 0.0; }
};

struct LinkProbs {
  double p_fa_ts = 0.0;     // identical for every sensor
  Eigen::ArrayXd p_d_ts;    // per sensor, depends on (x_T, mu)
  Eigen::ArrayXd p_fa_sf;   // per sensor
  Eigen::ArrayXd p_d_sf;    // per sensor
  double n_secondary = 0.0;
};

struct TransitionProbs {
  Eigen::ArrayXd rho0;
  Eigen::ArrayXd rho1;
  /// True when some rho0 is exactly 0 or 1 (structurally degenerate LLR).
  bool degenerate = false;
};

using DecisionVector = std::vector<std::uint8_t>;

/// Candidate target positions and secretion rates for the grid searches.
/// The mu grid must exclude 0 (H1 estimation only).
struct GridSpec {
  std::vector<Eigen::Vector3d> positions;
  std::vector<double> mu_values;
  void validate() const;
};

/// Local log-likelihood ratio at a sensor: log((mu g + zeta0)/zeta0) y - mu g.
/// `gain` is the steady-state channel gain g(x_T, x_k). zeta0 = 0 is rejected.
double ns_llr(double y, double mu, double gain, double zeta0);

/// UMP local hard decision: 1 iff y > tau1.
int ns_decide(double y, int tau1);

/// Smallest integer threshold tau with H(tau, zeta) <= omega. The paper's
/// max{tau : H(tau) - omega <= 0} selects an unbounded set because H decreases
/// in tau; the detection-maximizing reading is the minimal compliant tau.
int select_tau1(double omega1, double zeta0);
/// The same rule applied to a fusion-center link with noise mean zeta.
int select_link_threshold(double omega, double zeta);

/// Everything fixed across trials once the topology is known: link
/// probabilities for the sensor->FC channels, noise, thresholds, and the
/// steady-state gain used for target->sensor means.
struct DetectionModel {
  std::vector<Eigen::Vector3d> sensors;
  channel::SteadyStateGain gain;  // target->sensor steady-state gain
  double zeta0 = 0.0;
  int tau1 = 0;
  int tau2 = 0;
  double n_secondary = 0.0;
  double p_fa_ts = 0.0;
  Eigen::ArrayXd zeta_fc;
  Eigen::ArrayXd p_fa_sf;
  Eigen::ArrayXd p_d_sf;
  Eigen::ArrayXd fc_signal_mean;      // N * P(elapsed; dist_kF) per sensor
  Eigen::ArrayXd rho0;
  Eigen::ArrayXd log_rho0;            // cached for the fusion statistics
  Eigen::ArrayXd log_one_minus_rho0;

  int sensor_count() const { return static_cast<int>(sensors.size()); }

  static DetectionModel build(const channel::NetworkLayout& layout,
                              const channel::ReactionChannelParams& ns_params,
                              const channel::DerivedChannelConstants& ns_consts,
                              const channel::ReactionChannelParams& fc_params,
                              const channel::DerivedChannelConstants& fc_consts, double elapsed,
                              const NoiseModel& noise, int tau1, int tau2, double n_secondary);

  /// Detection probability of a sensor for a target at distance `dist` with
  /// rate mu: H(tau1, zeta0 + mu g(dist)).
  double p_d_ts(double dist, double mu) const;
  /// End-to-end Bernoulli parameter of d_k under H1 with the target at
  /// distance `dist` from sensor k.
  double rho1(int k, double dist, double mu) const;
};

/// Target->sensor and sensor->FC false-alarm/detection probabilities for a
/// scenario (Eqs. of the UMP test applied per link).
LinkProbs link_probs(const Scenario& scenario, const DetectionModel& model);

/// Binary non-symmetric channel parameters of d_k under each hypothesis.
TransitionProbs transition_probs(const LinkProbs& lp);

/// Genie-aided total LLR of the decision vector. Saturated rho1 (rounded to 1
/// in double) yields -inf contributions for d_k = 0; that is the correct limit
/// and propagates safely through thresholding and quantiles.
double gad_llr(const DecisionVector& d, const TransitionProbs& tp);

struct GlrtEstimate {
  Eigen::Vector3d x_hat = Eigen::Vector3d::Zero();
  double mu_hat = 0.0;
  std::size_t grid_index = 0;  // flattened position-major index
  double objective = 0.0;
};

/// Grid ML estimate of (x_T, mu) under H1; ties break to the lowest
/// position-major grid index.
GlrtEstimate glrt_estimate(const DecisionVector& d, const GridSpec& grid,
                           const DetectionModel& model);

/// G-LRT decision variable: twice the LLR at the grid ML point.
double glrt_stat(const DecisionVector& d, const GridSpec& grid, const DetectionModel& model);

/// Closed-form d rho1 / d mu for sensor k (Lemma-2 form).
double rho1_derivative(int k, const Eigen::Vector3d& x_target, double mu,
                       const DetectionModel& model);

/// Fisher information about mu, summed over sensors:
/// sum_k (d rho1/d mu)^2 / (rho1 (1 - rho1)).
double fisher_info(const Eigen::Vector3d& x_target, double mu, const DetectionModel& model);

/// G-LOD decision variable: the Fisher-normalized score at mu = 0 maximized
/// over candidate positions. Candidates with all-zero scores are skipped; if
/// every candidate is uninformative a std::domain_error reports the
/// no-signal-geometry condition.
double glod_stat(const DecisionVector& d, const std::vector<Eigen::Vector3d>& positions,
                 const DetectionModel& model);

struct CalibratedThreshold {
  double tau3 = 0.0;
  int n_samples = 0;
  double target_pfa = 0.0;
  double calibration_pfa = 0.0;     // in-sample rate at tau3
  double ci_halfwidth = 0.0;        // binomial normal-approx half width at the target
  bool low_sample_warning = false;  // n * omega2 < 20
};

/// Empirical (1 - omega2) quantile of H0 statistics: the smallest sample value
/// tau3 with #{stat > tau3}/n <= omega2.
CalibratedThreshold calibrate_threshold(std::vector<double> h0_stats, double omega2);

}  // namespace mcdet::detect
