#include "mcdet/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcdet/numerics.hpp"

namespace mcdet::detect {

namespace {

double poisson_pmf(int k, double zeta) {
  if (zeta <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-zeta + k * std::log(zeta) - std::lgamma(k + 1.0));
}

}  // namespace

void GridSpec::validate() const {
  if (positions.empty()) throw std::invalid_argument("GridSpec: empty position grid");
  if (mu_values.empty()) throw std::invalid_argument("GridSpec: empty mu grid");
  for (double m : mu_values)
    if (!(m > 0.0)) throw std::invalid_argument("GridSpec: mu grid must be positive (exclude 0)");
}

double ns_llr(double y, double mu, double gain, double zeta0) {
  if (!(zeta0 > 0.0)) throw std::invalid_argument("ns_llr: zeta0 must be > 0");
  if (!(mu > 0.0)) throw std::invalid_argument("ns_llr: mu must be > 0");
  const double mg = mu * gain;
  return std::log1p(mg / zeta0) * y - mg;
}

int ns_decide(double y, int tau1) { return y > tau1 ? 1 : 0; }

int select_link_threshold(double omega, double zeta) {
  if (!(omega > 0.0 && omega < 1.0))
    throw std::invalid_argument("select threshold: omega must lie in (0, 1)");
  int tau = 0;
  while (numerics::poisson_tail(tau, zeta) > omega) ++tau;
  return tau;
}

int select_tau1(double omega1, double zeta0) { return select_link_threshold(omega1, zeta0); }

DetectionModel DetectionModel::build(const channel::NetworkLayout& layout,
                                     const channel::ReactionChannelParams& ns_params,
                                     const channel::DerivedChannelConstants& ns_consts,
                                     const channel::ReactionChannelParams& fc_params,
                                     const channel::DerivedChannelConstants& fc_consts,
                                     double elapsed, const NoiseModel& noise, int tau1, int tau2,
                                     double n_secondary) {
  if (tau1 < 0 || tau2 < 0) throw std::invalid_argument("DetectionModel: thresholds must be >= 0");
  DetectionModel m;
  m.sensors = layout.sensors;
  m.gain = channel::steady_state_gain(ns_params, ns_consts);
  m.zeta0 = noise.zeta0;
  m.tau1 = tau1;
  m.tau2 = tau2;
  m.n_secondary = n_secondary;
  m.p_fa_ts = numerics::poisson_tail(tau1, noise.zeta0);

  const int k = layout.sensor_count();
  m.zeta_fc = noise.zeta_fc.size() == 1 ? Eigen::ArrayXd::Constant(k, noise.zeta_fc[0])
                                        : noise.zeta_fc;
  if (m.zeta_fc.size() != k)
    throw std::invalid_argument("DetectionModel: zeta_fc size must be 1 or K");
  m.p_fa_sf.resize(k);
  m.p_d_sf.resize(k);
  m.fc_signal_mean.resize(k);
  for (int i = 0; i < k; ++i) {
    m.p_fa_sf[i] = numerics::poisson_tail(tau2, m.zeta_fc[i]);
    const double p_fc =
        channel::fc_activation_probability(elapsed, layout.sensor_fc_dist[i], fc_params, fc_consts);
    m.fc_signal_mean[i] = n_secondary * p_fc;
    m.p_d_sf[i] = numerics::poisson_tail(tau2, m.zeta_fc[i] + m.fc_signal_mean[i]);
  }
  m.rho0 = m.p_d_sf * m.p_fa_ts + m.p_fa_sf * (1.0 - m.p_fa_ts);
  m.log_rho0 = m.rho0.log();
  m.log_one_minus_rho0 = (1.0 - m.rho0).log();
  return m;
}

double DetectionModel::p_d_ts(double dist, double mu) const {
  return numerics::poisson_tail(tau1, zeta0 + mu * gain(dist));
}

double DetectionModel::rho1(int k, double dist, double mu) const {
  const double pd = p_d_ts(dist, mu);
  return p_d_sf[k] * pd + p_fa_sf[k] * (1.0 - pd);
}

LinkProbs link_probs(const Scenario& scenario, const DetectionModel& model) {
  LinkProbs lp;
  const int k = model.sensor_count();
  lp.p_fa_ts = model.p_fa_ts;
  lp.p_fa_sf = model.p_fa_sf;
  lp.p_d_sf = model.p_d_sf;
  lp.n_secondary = model.n_secondary;
  lp.p_d_ts.resize(k);
  for (int i = 0; i < k; ++i) {
    const double dist = (scenario.target - model.sensors[i]).norm();
    lp.p_d_ts[i] = model.p_d_ts(dist, scenario.mu);
  }
  return lp;
}

TransitionProbs transition_probs(const LinkProbs& lp) {
  TransitionProbs tp;
  tp.rho0 = lp.p_d_sf * lp.p_fa_ts + lp.p_fa_sf * (1.0 - lp.p_fa_ts);
  tp.rho1 = lp.p_d_sf * lp.p_d_ts + lp.p_fa_sf * (1.0 - lp.p_d_ts);
  tp.degenerate = false;
  for (int i = 0; i < tp.rho0.size(); ++i) {
    if (tp.rho0[i] <= 0.0 || tp.rho0[i] >= 1.0) tp.degenerate = true;
  }
  return tp;
}

double gad_llr(const DecisionVector& d, const TransitionProbs& tp) {
  if (tp.degenerate) throw std::domain_error("gad_llr: degenerate rho0 (exactly 0 or 1)");
  if (static_cast<int>(d.size()) != tp.rho0.size())
    throw std::invalid_argument("gad_llr: decision vector length mismatch");
  double llr = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double r0 = tp.rho0[k], r1 = tp.rho1[k];
    llr += d[k] ? std::log(r1 / r0) : std::log((1.0 - r1) / (1.0 - r0));
  }
  return llr;
}

namespace {

// Shared H1 log-likelihood of d at one grid candidate.
double h1_log_likelihood(const DecisionVector& d, const Eigen::Vector3d& x, double mu,
                         const DetectionModel& model) {
  double ll = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double dist = (x - model.sensors[k]).norm();
    const double pd = model.p_d_ts(dist, mu);
    const double r1 = model.p_d_sf[k] * pd + model.p_fa_sf[k] * (1.0 - pd);
    ll += d[k] ? std::log(r1) : std::log1p(-r1);
  }
  return ll;
}

}  // namespace

GlrtEstimate glrt_estimate(const DecisionVector& d, const GridSpec& grid,
                           const DetectionModel& model) {
  grid.validate();
  if (static_cast<int>(d.size()) != model.sensor_count())
    throw std::invalid_argument("glrt_estimate: decision vector length mismatch");
  GlrtEstimate best;
  best.objective = -std::numeric_limits<double>::infinity();
  bool first = true;
  std::size_t index = 0;
  for (const auto& x : grid.positions) {
    for (double mu : grid.mu_values) {
      const double ll = h1_log_likelihood(d, x, mu, model);
      if (first || ll > best.objective) {
        best = {x, mu, index, ll};
        first = false;
      }
      ++index;
    }
  }
  return best;
}

double glrt_stat(const DecisionVector& d, const GridSpec& grid, const DetectionModel& model) {
  const GlrtEstimate est = glrt_estimate(d, grid, model);
  double h0_ll = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (model.rho0[k] <= 0.0 || model.rho0[k] >= 1.0)
      throw std::domain_error("glrt_stat: degenerate rho0");
    h0_ll += d[k] ? model.log_rho0[k] : model.log_one_minus_rho0[k];
  }
  return 2.0 * (est.objective - h0_ll);
}

double rho1_derivative(int k, const Eigen::Vector3d& x_target, double mu,
                       const DetectionModel& model) {
  if (k < 0 || k >= model.sensor_count())
    throw std::invalid_argument("rho1_derivative: sensor index out of range");
  if (mu < 0.0) throw std::invalid_argument("rho1_derivative: mu must be >= 0");
  const double g = model.gain((x_target - model.sensors[k]).norm());
  const double pmf = poisson_pmf(model.tau1, mu * g + model.zeta0);
  return pmf * g * (model.p_d_sf[k] - model.p_fa_sf[k]);
}

double fisher_info(const Eigen::Vector3d& x_target, double mu, const DetectionModel& model) {
  if (mu < 0.0) throw std::invalid_argument("fisher_info: mu must be >= 0");
  double info = 0.0;
  for (int k = 0; k < model.sensor_count(); ++k) {
    const double drho = rho1_derivative(k, x_target, mu, model);
    if (drho == 0.0) continue;
    const double dist = (x_target - model.sensors[k]).norm();
    const double pd = model.p_d_ts(dist, mu);
    const double r1 = model.p_d_sf[k] * pd + model.p_fa_sf[k] * (1.0 - pd);
    if (r1 <= 0.0 || r1 >= 1.0)
      throw std::domain_error("fisher_info: degenerate rho1 with nonzero derivative");
    info += drho * drho / (r1 * (1.0 - r1));
  }
  return info;
}

double glod_stat(const DecisionVector& d, const std::vector<Eigen::Vector3d>& positions,
                 const DetectionModel& model) {
  if (positions.empty()) throw std::invalid_argument("glod_stat: empty position grid");
  if (static_cast<int>(d.size()) != model.sensor_count())
    throw std::invalid_argument("glod_stat: decision vector length mismatch");
  const double pmf0 = poisson_pmf(model.tau1, model.zeta0);
  double best = -std::numeric_limits<double>::infinity();
  bool any_valid = false;
  for (const auto& x : positions) {
    double score = 0.0, norm = 0.0;
    for (int k = 0; k < model.sensor_count(); ++k) {
      const double theta =
          model.gain((x - model.sensors[k]).norm()) * pmf0 * (model.p_d_sf[k] - model.p_fa_sf[k]);
      if (theta == 0.0) continue;
      const double r0 = model.rho0[k];
      if (r0 <= 0.0 || r0 >= 1.0) throw std::domain_error("glod_stat: degenerate rho0");
      score += theta * (d[k] ? 1.0 / r0 : -1.0 / (1.0 - r0));
      norm += theta * theta / (r0 * (1.0 - r0));
    }
    if (norm <= 0.0) continue;  // zero-information candidate carries no evidence
    any_valid = true;
    best = std::max(best, score / std::sqrt(norm));
  }
  if (!any_valid)
    throw std::domain_error("glod_stat: every candidate position is signal-degenerate");
  return best;
}

CalibratedThreshold calibrate_threshold(std::vector<double> h0_stats, double omega2) {
  if (h0_stats.empty()) throw std::invalid_argument("calibrate_threshold: no samples");
  if (!(omega2 > 0.0 && omega2 < 1.0))
    throw std::invalid_argument("calibrate_threshold: omega2 must lie in (0, 1)");
  CalibratedThreshold out;
  out.n_samples = static_cast<int>(h0_stats.size());
  out.target_pfa = omega2;
  out.low_sample_warning = out.n_samples * omega2 < 20.0;
  std::sort(h0_stats.begin(), h0_stats.end());
  const double n = static_cast<double>(h0_stats.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(n * (1.0 - omega2)));
  rank = std::min(std::max<std::size_t>(rank, 1), h0_stats.size());
  out.tau3 = h0_stats[rank - 1];
  std::size_t exceed = 0;
  for (auto it = h0_stats.rbegin(); it != h0_stats.rend() && *it > out.tau3; ++it) ++exceed;
  out.calibration_pfa = static_cast<double>(exceed) / n;
  out.ci_halfwidth = 1.96 * std::sqrt(omega2 * (1.0 - omega2) / n);
  return out;
}

}  // namespace mcdet::detect
