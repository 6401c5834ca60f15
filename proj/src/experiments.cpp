#include "mcdet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mcdet/numerics.hpp"
#include "mcdet/parallel.hpp"

namespace mcdet::harness {

namespace {

// Stream-id bases keep calibration, evaluation, and layout draws independent.
constexpr std::uint64_t kStreamCalibration = 1ULL << 40;
constexpr std::uint64_t kStreamH0Eval = 2ULL << 40;
constexpr std::uint64_t kStreamH1Eval = 3ULL << 40;
constexpr std::uint64_t kStreamFixedLayout = 7ULL << 40;

double binomial_ci(double p_hat, double n) {
  return n > 0 ? 1.96 * std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / n) : 0.0;
}

}  // namespace

void ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  auto flag = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  auto check_channel = [&](const channel::ReactionChannelParams& p, const char* name) {
    try {
      p.validate();
    } catch (const std::exception& e) {
      bad.push_back(std::string(name) + ": " + e.what());
    }
  };
  check_channel(ns_channel, "ns_channel");
  check_channel(fc_channel, "fc_channel");
  flag(sensor_count >= 1, "network.sensor_count must be >= 1");
  flag(square_edge > 0.0, "network.square_edge_um must be > 0");
  flag(min_spacing >= 0.0, "network.min_spacing_um must be >= 0");
  flag(t1 >= 0.0, "timing.t1_s must be >= 0");
  flag(t2 > t1, "timing.t2_s must exceed timing.t1_s");
  flag((tau1 >= 0) != (omega1 > 0.0), "detection: exactly one of tau1 / omega1 must be set");
  flag((tau2 >= 0) != (omega2_link > 0.0),
       "detection: exactly one of tau2 / omega2_link must be set");
  flag(zeta0 >= 0.0, "detection.zeta0 must be >= 0");
  flag(zeta_fc >= 0.0, "detection.zeta_fc must be >= 0");
  flag(n_secondary >= 0.0, "detection.n_secondary must be >= 0");
  flag(mu > 0.0, "scenario.mu_per_s must be > 0");
  flag(grid_axis_points >= 1, "grid.positions_per_axis must be >= 1");
  flag(grid_mu_points >= 1, "grid.mu_grid_points must be >= 1");
  flag(calibration_trials >= 1, "montecarlo.calibration_trials must be >= 1");
  flag(h0_eval_trials >= 1, "montecarlo.h0_eval_trials must be >= 1");
  flag(h1_eval_trials >= 1, "montecarlo.h1_eval_trials must be >= 1");
  flag(!target_pfa.empty(), "montecarlo.target_pfa must be non-empty");
  for (double p : target_pfa)
    flag(p > 0.0 && p < 1.0, "montecarlo.target_pfa entries must lie in (0, 1)");
  flag(!sweep_k.empty(), "montecarlo.sweep_k must be non-empty");
  for (int k : sweep_k) flag(k >= 1, "montecarlo.sweep_k entries must be >= 1");
  flag(sweep_target_pfa > 0.0 && sweep_target_pfa < 1.0,
       "montecarlo.sweep_target_pfa must lie in (0, 1)");
  flag(sim_dt > 0.0, "simulation.dt_s must be > 0");
  flag(sim_trials >= 1, "simulation.trials must be >= 1");
  flag(sim_mu >= 0.0, "simulation.mu_per_s must be >= 0");
  flag(sim_distance > ns_channel.receiver_radius,
       "simulation.source_distance_um must exceed the receiver radius");
  flag(!sim_kb.empty(), "simulation.kb_values_per_s must be non-empty");
  flag(!sim_sample_times.empty(), "simulation.sample_times_s must be non-empty");
  for (double t : sim_sample_times)
    flag(t > 0.0, "simulation.sample_times_s entries must be > 0");
  flag(binding_correction > 0.0, "simulation.binding_correction must be > 0");
  if (!bad.empty()) {
    std::ostringstream all;
    for (std::size_t i = 0; i < bad.size(); ++i) all << (i ? "; " : "") << bad[i];
    throw std::invalid_argument("ExperimentConfig: " + all.str());
  }
}

int ExperimentConfig::resolved_tau1() const {
  return tau1 >= 0 ? tau1 : detect::select_tau1(omega1, zeta0);
}

int ExperimentConfig::resolved_tau2() const {
  return tau2 >= 0 ? tau2 : detect::select_link_threshold(omega2_link, zeta_fc);
}

channel::NetworkLayout sample_topology(const ExperimentConfig& cfg, int sensor_count,
                                       Xoshiro256pp& rng) {
  const double half = cfg.square_edge / 2.0;
  const double a = cfg.ns_channel.receiver_radius;
  const double b = cfg.fc_channel.receiver_radius;
  std::vector<Eigen::Vector3d> sensors;
  sensors.reserve(sensor_count);
  const long budget = 1000L * sensor_count + 1000L;
  long attempts = 0;
  while (static_cast<int>(sensors.size()) < sensor_count) {
    if (++attempts > budget)
      throw std::runtime_error("sample_topology: placement retry budget exhausted");
    Eigen::Vector3d x(-half + cfg.square_edge * rng.uniform(),
                      -half + cfg.square_edge * rng.uniform(), 0.0);
    if ((x - cfg.target).norm() <= a) continue;
    if ((x - cfg.fc_position).norm() <= b) continue;
    bool ok = true;
    for (const auto& s : sensors) {
      if ((x - s).norm() < cfg.min_spacing) {
        ok = false;
        break;
      }
    }
    if (ok) sensors.push_back(x);
  }
  return channel::NetworkLayout::create(cfg.target, std::move(sensors), cfg.fc_position, a, b,
                                        cfg.min_spacing);
}

detect::DecisionVector simulate_decision_vector(const detect::Scenario& scenario,
                                                const detect::DetectionModel& model,
                                                int tau1, int tau2, Xoshiro256pp& rng) {
  const int k = model.sensor_count();
  detect::DecisionVector d(k, 0);
  std::poisson_distribution<long> poisson;
  using Param = std::poisson_distribution<long>::param_type;
  for (int i = 0; i < k; ++i) {
    double lambda_y = model.zeta0;
    if (scenario.is_h1())
      lambda_y += scenario.mu * model.gain((scenario.target - model.sensors[i]).norm());
    const long y = lambda_y > 0.0 ? poisson(rng, Param(lambda_y)) : 0;
    const int c = detect::ns_decide(static_cast<double>(y), tau1);
    double lambda_z = model.zeta_fc[i];
    if (c == 1) lambda_z += model.fc_signal_mean[i];
    const long z = lambda_z > 0.0 ? poisson(rng, Param(lambda_z)) : 0;
    d[i] = z > tau2 ? 1 : 0;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Poisson tail lookup H(tau, zeta0 + u) for the grid searches
// ---------------------------------------------------------------------------

namespace {

class PoissonTailTable {
 public:
  PoissonTailTable() = default;
  PoissonTailTable(int tau, double zeta0, double u_max, double du)
      : zeta0_(zeta0), du_(du), inv_du_(1.0 / du), u_max_(u_max) {
    const int n = static_cast<int>(std::ceil(u_max / du)) + 1;
    h_.resize(n);
    dh_.resize(n);
    for (int i = 0; i < n; ++i) {
      const double zeta = zeta0 + i * du;
      h_[i] = numerics::poisson_tail(tau, zeta);
      dh_[i] = zeta > 0.0
                   ? std::exp(-zeta + tau * std::log(zeta) - std::lgamma(tau + 1.0))
                   : (tau == 0 ? 1.0 : 0.0);
    }
  }

  double operator()(double u) const {
    if (u <= 0.0) return h_.front();
    if (u >= u_max_) return h_.back();
    const int i = static_cast<int>(u * inv_du_);
    const double s = (u - i * du_) * inv_du_;
    const double s2 = s * s, s3 = s2 * s;
    // cubic Hermite with exact endpoint derivatives
    return (2 * s3 - 3 * s2 + 1) * h_[i] + (s3 - 2 * s2 + s) * du_ * dh_[i] +
           (-2 * s3 + 3 * s2) * h_[i + 1] + (s3 - s2) * du_ * dh_[i + 1];
  }

 private:
  double zeta0_ = 0.0, du_ = 1.0, inv_du_ = 1.0, u_max_ = 0.0;
  std::vector<double> h_, dh_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Trial engine
// ---------------------------------------------------------------------------

struct TrialEngine::Impl {
  ExperimentConfig cfg;
  int sensors = 0;
  std::uint64_t seed = 0;
  channel::DerivedChannelConstants ns_consts, fc_consts;
  double elapsed = 0.0;
  int tau1 = 0, tau2 = 0;
  detect::NoiseModel noise;
  detect::Scenario h1_scenario;
  std::vector<Eigen::Vector3d> grid_positions;
  std::vector<double> mu_grid;
  double mu_grid_max = 0.0;
  PoissonTailTable tail_table;
  std::optional<channel::NetworkLayout> fixed_layout;

  detect::DetectionModel build_model(const channel::NetworkLayout& layout) const {
    return detect::DetectionModel::build(layout, cfg.ns_channel, ns_consts, cfg.fc_channel,
                                         fc_consts, elapsed, noise, tau1, tau2, cfg.n_secondary);
  }

  // Accelerated G-LRT over the grid: sensors whose mean shift stays below
  // kActiveShift for every mu candidate contribute their H0 term exactly
  // (rho1(u -> 0) == rho0); active sensors go through the tail table.
  static constexpr double kActiveShift = 1e-5;

  double fast_glrt(const detect::DetectionModel& model, const detect::DecisionVector& d,
                   const std::vector<double>& g_matrix) const {
    const int k = model.sensor_count();
    double base = 0.0;
    for (int i = 0; i < k; ++i)
      base += d[i] ? model.log_rho0[i] : model.log_one_minus_rho0[i];

    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> active;
    std::vector<double> active_g;
    active.reserve(k);
    active_g.reserve(k);
    for (std::size_t j = 0; j < grid_positions.size(); ++j) {
      const double* g_row = g_matrix.data() + j * k;
      active.clear();
      active_g.clear();
      double base_active = 0.0;
      for (int i = 0; i < k; ++i) {
        if (mu_grid_max * g_row[i] > kActiveShift) {
          active.push_back(i);
          active_g.push_back(g_row[i]);
          base_active += d[i] ? model.log_rho0[i] : model.log_one_minus_rho0[i];
        }
      }
      if (active.empty()) {
        best = std::max(best, base);
        continue;
      }
      for (double mu : mu_grid) {
        double sum = 0.0, prod = 1.0;
        int in_chunk = 0;
        for (std::size_t a = 0; a < active.size(); ++a) {
          const int i = active[a];
          const double h = tail_table(mu * active_g[a]);
          const double r1 = model.p_fa_sf[i] + (model.p_d_sf[i] - model.p_fa_sf[i]) * h;
          prod *= d[i] ? r1 : 1.0 - r1;
          if (++in_chunk == 8) {
            sum += std::log(prod);
            prod = 1.0;
            in_chunk = 0;
          }
        }
        if (in_chunk > 0) sum += std::log(prod);
        const double obj = base - base_active + sum;
        if (obj > best) best = obj;
      }
    }
    double h0 = 0.0;
    for (int i = 0; i < k; ++i) h0 += d[i] ? model.log_rho0[i] : model.log_one_minus_rho0[i];
    return 2.0 * (best - h0);
  }

  double fast_glod(const detect::DetectionModel& model, const detect::DecisionVector& d,
                   const std::vector<double>& g_matrix) const {
    const int k = model.sensor_count();
    const double pmf0 =
        noise.zeta0 > 0.0 ? std::exp(-noise.zeta0 + tau1 * std::log(noise.zeta0) -
                                     std::lgamma(tau1 + 1.0))
                          : (tau1 == 0 ? 1.0 : 0.0);
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < grid_positions.size(); ++j) {
      const double* g_row = g_matrix.data() + j * k;
      double score = 0.0, norm = 0.0;
      for (int i = 0; i < k; ++i) {
        const double theta = g_row[i] * pmf0 * (model.p_d_sf[i] - model.p_fa_sf[i]);
        if (theta == 0.0) continue;
        const double r0 = model.rho0[i];
        score += theta * (d[i] ? 1.0 / r0 : -1.0 / (1.0 - r0));
        norm += theta * theta / (r0 * (1.0 - r0));
      }
      if (norm <= 0.0) continue;
      any = true;
      best = std::max(best, score / std::sqrt(norm));
    }
    if (!any) throw std::domain_error("fast_glod: every candidate position is signal-degenerate");
    return best;
  }

  TrialStatistics trial(std::uint64_t stream_id, bool under_h1,
                        detect::DetectionModel* model_out, detect::DecisionVector* d_out) const {
    Xoshiro256pp rng = trial_stream(seed, stream_id);
    channel::NetworkLayout layout =
        fixed_layout ? *fixed_layout : sample_topology(cfg, sensors, rng);
    const detect::DetectionModel model = build_model(layout);
    const detect::Scenario scenario =
        under_h1 ? h1_scenario : detect::Scenario{h1_scenario.target, 0.0};
    const detect::DecisionVector d = simulate_decision_vector(scenario, model, tau1, tau2, rng);

    // g(x_j, x_k) for every grid candidate and sensor; shared by both grids.
    const int k = model.sensor_count();
    std::vector<double> g_matrix(grid_positions.size() * k);
    for (std::size_t j = 0; j < grid_positions.size(); ++j) {
      double* row = g_matrix.data() + j * k;
      for (int i = 0; i < k; ++i)
        row[i] = model.gain((grid_positions[j] - model.sensors[i]).norm());
    }

    TrialStatistics stats;
    const detect::LinkProbs lp = detect::link_probs(h1_scenario, model);
    stats.gad = detect::gad_llr(d, detect::transition_probs(lp));
    stats.glrt = fast_glrt(model, d, g_matrix);
    stats.glod = fast_glod(model, d, g_matrix);
    if (model_out) *model_out = model;
    if (d_out) *d_out = d;
    return stats;
  }
};

TrialEngine::TrialEngine(const ExperimentConfig& cfg, int sensor_count, std::uint64_t seed)
    : impl_(new Impl) {
  impl_->cfg = cfg;
  impl_->sensors = sensor_count;
  impl_->seed = seed;
  impl_->ns_consts = channel::derive_constants(cfg.ns_channel);
  impl_->fc_consts = channel::derive_constants(cfg.fc_channel);
  impl_->elapsed = cfg.t2 - cfg.t1;
  impl_->tau1 = cfg.resolved_tau1();
  impl_->tau2 = cfg.resolved_tau2();
  impl_->noise.zeta0 = cfg.zeta0;
  impl_->noise.zeta_fc = Eigen::ArrayXd::Constant(1, cfg.zeta_fc);
  impl_->h1_scenario = {cfg.target, cfg.mu};

  const int n = cfg.grid_axis_points;
  impl_->grid_positions.reserve(static_cast<std::size_t>(n) * n);
  for (int jx = 0; jx < n; ++jx) {
    for (int jy = 0; jy < n; ++jy) {
      const double x = n == 1 ? 0.0 : -cfg.square_edge / 2.0 + cfg.square_edge * jx / (n - 1.0);
      const double y = n == 1 ? 0.0 : -cfg.square_edge / 2.0 + cfg.square_edge * jy / (n - 1.0);
      impl_->grid_positions.emplace_back(x, y, 0.0);
    }
  }
  impl_->mu_grid.reserve(cfg.grid_mu_points);
  for (int l = 1; l <= cfg.grid_mu_points; ++l)
    impl_->mu_grid.push_back(2.0 * cfg.mu * l / cfg.grid_mu_points);
  impl_->mu_grid_max = impl_->mu_grid.back();
  impl_->tail_table = PoissonTailTable(impl_->tau1, cfg.zeta0, 90.0 + 2.0 * cfg.zeta0, 0.02);

  if (!cfg.resample_topology) {
    Xoshiro256pp rng = trial_stream(seed, kStreamFixedLayout);
    impl_->fixed_layout = sample_topology(cfg, sensor_count, rng);
  }
}

TrialEngine::~TrialEngine() { delete impl_; }

TrialStatistics TrialEngine::run_trial(std::uint64_t stream_id, bool under_h1) const {
  return impl_->trial(stream_id, under_h1, nullptr, nullptr);
}

TrialStatistics TrialEngine::run_trial_verbose(std::uint64_t stream_id, bool under_h1,
                                               detect::DetectionModel* model_out,
                                               detect::DecisionVector* d_out) const {
  return impl_->trial(stream_id, under_h1, model_out, d_out);
}

int TrialEngine::sensor_count() const { return impl_->sensors; }

// ---------------------------------------------------------------------------
// Detection experiments
// ---------------------------------------------------------------------------

namespace {

struct PhaseStats {
  std::vector<double> gad, glrt, glod;
};

PhaseStats collect_phase(const TrialEngine& engine, std::uint64_t stream_base, long trials,
                         bool under_h1, unsigned workers) {
  PhaseStats out;
  out.gad.resize(trials);
  out.glrt.resize(trials);
  out.glod.resize(trials);
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const TrialStatistics s = engine.run_trial(stream_base + t, under_h1);
    out.gad[t] = s.gad;
    out.glrt[t] = s.glrt;
    out.glod[t] = s.glod;
  });
  return out;
}

struct DetectorColumns {
  const char* name;
  const std::vector<double>* cal;
  const std::vector<double>* h0;
  const std::vector<double>* h1;
};

std::vector<DetectorPoint> score_targets(const std::vector<DetectorColumns>& detectors,
                                         const std::vector<double>& targets, int sensors,
                                         std::vector<std::string>& warnings) {
  std::vector<DetectorPoint> points;
  for (const auto& det : detectors) {
    for (double target : targets) {
      const double n_cal = static_cast<double>(det.cal->size());
      if (n_cal * target < 20.0) {
        std::ostringstream w;
        w << det.name << ": target_pfa " << target << " excluded (calibration_trials * target < 20)";
        warnings.push_back(w.str());
        continue;
      }
      const auto cal = detect::calibrate_threshold(*det.cal, target);
      DetectorPoint p;
      p.detector = det.name;
      p.sensors = sensors;
      p.target_pfa = target;
      p.tau3 = cal.tau3;
      long exceed = 0;
      for (double s : *det.h0) exceed += s > cal.tau3;
      p.achieved_pfa = static_cast<double>(exceed) / det.h0->size();
      p.achieved_pfa_ci = binomial_ci(p.achieved_pfa, static_cast<double>(det.h0->size()));
      long miss = 0;
      for (double s : *det.h1) miss += !(s > cal.tau3);
      p.pm = static_cast<double>(miss) / det.h1->size();
      p.pm_ci = binomial_ci(p.pm, static_cast<double>(det.h1->size()));
      points.push_back(p);
    }
  }
  return points;
}

std::vector<DetectorPoint> roc_points_for(const ExperimentConfig& cfg, int sensors,
                                          std::uint64_t seed,
                                          const std::vector<double>& targets, unsigned workers,
                                          std::vector<std::string>& warnings) {
  const TrialEngine engine(cfg, sensors, seed);
  const PhaseStats cal = collect_phase(engine, kStreamCalibration, cfg.calibration_trials, false, workers);
  const PhaseStats h0 = collect_phase(engine, kStreamH0Eval, cfg.h0_eval_trials, false, workers);
  const PhaseStats h1 = collect_phase(engine, kStreamH1Eval, cfg.h1_eval_trials, true, workers);
  const std::vector<DetectorColumns> detectors = {
      {"gad", &cal.gad, &h0.gad, &h1.gad},
      {"glrt", &cal.glrt, &h0.glrt, &h1.glrt},
      {"glod", &cal.glod, &h0.glod, &h1.glod},
  };
  return score_targets(detectors, targets, sensors, warnings);
}

}  // namespace

RocResult run_roc(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  RocResult result;
  result.points = roc_points_for(cfg, cfg.sensor_count, cfg.master_seed, cfg.target_pfa, workers,
                                 result.warnings);
  return result;
}

SweepResult run_sweep_k(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  SweepResult result;
  const std::vector<double> targets{cfg.sweep_target_pfa};
  for (int k : cfg.sweep_k) {
    std::uint64_t mix = cfg.master_seed ^ (0x9E3779B97F4A7C15ULL * (k + 1));
    const std::uint64_t sub_seed = splitmix64(mix);
    auto points = roc_points_for(cfg, k, sub_seed, targets, workers, result.warnings);
    result.points.insert(result.points.end(), points.begin(), points.end());
  }
  return result;
}

std::vector<CalibrationRow> run_calibrate(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  const TrialEngine engine(cfg, cfg.sensor_count, cfg.master_seed);
  const PhaseStats cal =
      collect_phase(engine, kStreamCalibration, cfg.calibration_trials, false, workers);
  const std::vector<std::pair<const char*, const std::vector<double>*>> detectors = {
      {"gad", &cal.gad}, {"glrt", &cal.glrt}, {"glod", &cal.glod}};
  std::vector<CalibrationRow> rows;
  for (const auto& [name, stats] : detectors) {
    for (double target : cfg.target_pfa) {
      const auto c = detect::calibrate_threshold(*stats, target);
      rows.push_back({name, target, c.tau3, c.calibration_pfa, c.ci_halfwidth,
                      static_cast<long>(c.n_samples), c.low_sample_warning});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Channel validation experiments
// ---------------------------------------------------------------------------

namespace {

psim::SimConfig make_sim_config(const ExperimentConfig& cfg, double kb, std::uint64_t sub_seed,
                                double horizon) {
  psim::SimConfig sim;
  sim.dt = cfg.sim_dt;
  sim.horizon = horizon;
  sim.seed = sub_seed;
  sim.release = psim::SimConfig::Release::kContinuous;
  sim.rate = cfg.sim_mu;
  sim.source = Eigen::Vector3d::Zero();
  sim.receiver_center = Eigen::Vector3d(cfg.sim_distance, 0.0, 0.0);
  sim.receiver = cfg.ns_channel;
  sim.receiver.k_backward = kb;
  sim.binding_correction = cfg.binding_correction;
  return sim;
}

std::uint64_t sub_seed_for(std::uint64_t master, std::uint64_t tag) {
  std::uint64_t mix = master ^ (0xA24BAED4963EE407ULL + tag * 0x9E3779B97F4A7C15ULL);
  return splitmix64(mix);
}

}  // namespace

std::vector<ChannelValidationRow> run_validate_channel(const ExperimentConfig& cfg,
                                                       unsigned workers) {
  cfg.validate();
  std::vector<ChannelValidationRow> rows;
  const double horizon = *std::max_element(cfg.sim_sample_times.begin(), cfg.sim_sample_times.end());
  for (std::size_t idx = 0; idx < cfg.sim_kb.size(); ++idx) {
    const double kb = cfg.sim_kb[idx];
    channel::ReactionChannelParams params = cfg.ns_channel;
    params.k_backward = kb;
    const auto consts = channel::derive_constants(params);
    const double asymptote =
        cfg.sim_mu * channel::steady_state_mean_g(cfg.sim_distance, params, consts);
    const psim::SimConfig sim = make_sim_config(cfg, kb, sub_seed_for(cfg.master_seed, idx), horizon);
    const auto ens = psim::ensemble_mean(sim, consts, cfg.sim_sample_times,
                                         static_cast<int>(cfg.sim_trials), workers);
    for (std::size_t i = 0; i < cfg.sim_sample_times.size(); ++i) {
      const double t = cfg.sim_sample_times[i];
      const double analytic =
          channel::transient_mean(t, cfg.sim_mu, cfg.sim_distance, params, consts, 0.0, 1e-9);
      ChannelValidationRow row;
      row.kb = kb;
      row.t = t;
      row.analytical_mean = analytic;
      row.simulated_mean = ens.mean_bound[i];
      row.rel_gap = analytic != 0.0 ? std::abs(ens.mean_bound[i] - analytic) / analytic : 0.0;
      row.asymptote = asymptote;
      row.sim_std_error = ens.std_error[i];
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<PoissonValidationRow> run_validate_poisson(const ExperimentConfig& cfg,
                                                       unsigned workers) {
  cfg.validate();
  std::vector<PoissonValidationRow> rows;
  const double t = cfg.t2;
  for (std::size_t idx = 0; idx < cfg.sim_kb.size(); ++idx) {
    const double kb = cfg.sim_kb[idx];
    channel::ReactionChannelParams params = cfg.ns_channel;
    params.k_backward = kb;
    const auto consts = channel::derive_constants(params);
    const double analytic =
        channel::transient_mean(t, cfg.sim_mu, cfg.sim_distance, params, consts, 0.0, 1e-9);
    const psim::SimConfig sim =
        make_sim_config(cfg, kb, sub_seed_for(cfg.master_seed, 0x1000 + idx), t);
    const auto hist = psim::ensemble_histogram(sim, consts, t, static_cast<int>(cfg.sim_trials),
                                               workers);
    double sim_mean = 0.0;
    for (std::size_t k = 0; k < hist.size(); ++k) sim_mean += k * hist[k];
    PoissonValidationRow row;
    row.kb = kb;
    row.t = t;
    row.analytic_mean = analytic;
    row.sim_mean = sim_mean;
    row.tv_distance = psim::tv_distance_to_poisson(hist, analytic);
    row.trials = cfg.sim_trials;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // \n line endings everywhere
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

}  // namespace

void write_roc_csv(const std::string& path, const RocResult& result) {
  auto out = open_out(path);
  out << "detector,target_pfa,achieved_pfa,pm,ci,pfa_ci,tau3\n";
  for (const auto& p : result.points) {
    out << p.detector << ',' << fmt(p.target_pfa) << ',' << fmt(p.achieved_pfa) << ','
        << fmt(p.pm) << ',' << fmt(p.pm_ci) << ',' << fmt(p.achieved_pfa_ci) << ','
        << fmt(p.tau3) << '\n';
  }
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  auto out = open_out(path);
  out << "detector,sensors,target_pfa,achieved_pfa,pm,ci,pfa_ci,tau3\n";
  for (const auto& p : result.points) {
    out << p.detector << ',' << p.sensors << ',' << fmt(p.target_pfa) << ','
        << fmt(p.achieved_pfa) << ',' << fmt(p.pm) << ',' << fmt(p.pm_ci) << ','
        << fmt(p.achieved_pfa_ci) << ',' << fmt(p.tau3) << '\n';
  }
}

void write_channel_validation_csv(const std::string& path,
                                  const std::vector<ChannelValidationRow>& rows) {
  auto out = open_out(path);
  out << "kb,t,analytical_mean,simulated_mean,rel_gap,asymptote,sim_std_error\n";
  for (const auto& r : rows) {
    out << fmt(r.kb) << ',' << fmt(r.t) << ',' << fmt(r.analytical_mean) << ','
        << fmt(r.simulated_mean) << ',' << fmt(r.rel_gap) << ',' << fmt(r.asymptote) << ','
        << fmt(r.sim_std_error) << '\n';
  }
}

void write_poisson_validation_csv(const std::string& path,
                                  const std::vector<PoissonValidationRow>& rows) {
  auto out = open_out(path);
  out << "kb,t,analytic_mean,sim_mean,tv_distance,trials\n";
  for (const auto& r : rows) {
    out << fmt(r.kb) << ',' << fmt(r.t) << ',' << fmt(r.analytic_mean) << ','
        << fmt(r.sim_mean) << ',' << fmt(r.tv_distance) << ',' << r.trials << '\n';
  }
}

void write_calibration_csv(const std::string& path, const std::vector<CalibrationRow>& rows) {
  auto out = open_out(path);
  out << "detector,target_pfa,tau3,calibration_pfa,ci,n_samples,low_sample_warning\n";
  for (const auto& r : rows) {
    out << r.detector << ',' << fmt(r.target_pfa) << ',' << fmt(r.tau3) << ','
        << fmt(r.calibration_pfa) << ',' << fmt(r.ci_halfwidth) << ',' << r.n_samples << ','
        << (r.low_sample_warning ? 1 : 0) << '\n';
  }
}

}  // namespace mcdet::harness
