#include "mcdet/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mcdet::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kChannelKeys[] = {"diffusion_um2_per_s",  "k_forward_um3_per_s", "k_backward_per_s",
                              "k_degradation_per_s",  "receiver_radius_um",  "receptor_count",
                              "receptor_radius_um"};
const char* kChannelUnits[] = {"um^2/s", "um^3/s/molecule", "1/s", "1/s", "um", "-", "um"};
const char* kChannelDescs[] = {"diffusion coefficient",
                               "microscopic forward binding rate",
                               "receptor unbinding rate",
                               "molecule degradation rate",
                               "receiver sphere radius",
                               "receptors per receiver",
                               "receptor disk radius"};

std::vector<SchemaEntry> build_schema() {
  std::vector<SchemaEntry> s;
  for (const char* sec : {"ns_channel", "fc_channel"}) {
    for (int i = 0; i < 7; ++i) s.push_back({sec, kChannelKeys[i], kChannelUnits[i], kChannelDescs[i], true});
  }
  s.push_back({"network", "sensor_count", "-", "number of sensors K", true});
  s.push_back({"network", "square_edge_um", "um", "surveillance square edge length", true});
  s.push_back({"network", "min_spacing_um", "um", "minimum sensor pair spacing", true});
  s.push_back({"network", "target_x_um", "um", "target x", true});
  s.push_back({"network", "target_y_um", "um", "target y", true});
  s.push_back({"network", "target_z_um", "um", "target z", true});
  s.push_back({"network", "fc_x_um", "um", "fusion center x", true});
  s.push_back({"network", "fc_y_um", "um", "fusion center y", true});
  s.push_back({"network", "fc_z_um", "um", "fusion center z", true});
  s.push_back({"timing", "t1_s", "s", "sensor secondary-release time", true});
  s.push_back({"timing", "t2_s", "s", "fusion-center readout time", true});
  s.push_back({"detection", "tau1", "-", "sensor count threshold (or set omega1)", false});
  s.push_back({"detection", "omega1", "-", "sensor false-alarm bound (or set tau1)", false});
  s.push_back({"detection", "tau2", "-", "FC link count threshold (or set omega2_link)", false});
  s.push_back({"detection", "omega2_link", "-", "FC link false-alarm bound (or set tau2)", false});
  s.push_back({"detection", "zeta0", "molecules", "environmental noise mean at sensors", true});
  s.push_back({"detection", "zeta_fc", "molecules", "environmental noise mean per FC type", true});
  s.push_back({"detection", "n_secondary", "molecules", "secondary molecules per activation", true});
  s.push_back({"scenario", "mu_per_s", "1/s", "H1 biomarker secretion rate", true});
  s.push_back({"grid", "positions_per_axis", "-", "candidate positions per axis", true});
  s.push_back({"grid", "mu_grid_points", "-", "mu candidates (2 l mu / n, l=1..n)", true});
  s.push_back({"montecarlo", "master_seed", "-", "master seed for all streams", true});
  s.push_back({"montecarlo", "resample_topology", "bool", "redraw sensor positions per trial", true});
  s.push_back({"montecarlo", "calibration_trials", "-", "H0 trials for threshold calibration", true});
  s.push_back({"montecarlo", "h0_eval_trials", "-", "H0 trials for achieved-P_fa estimation", true});
  s.push_back({"montecarlo", "h1_eval_trials", "-", "H1 trials for P_m estimation", true});
  s.push_back({"montecarlo", "target_pfa", "list", "global false-alarm targets", true});
  s.push_back({"montecarlo", "sweep_k", "list", "sensor counts for the K sweep", true});
  s.push_back({"montecarlo", "sweep_target_pfa", "-", "false-alarm target for the K sweep", true});
  s.push_back({"simulation", "dt_s", "s", "particle simulation step size", true});
  s.push_back({"simulation", "trials", "-", "simulation trials per configuration", true});
  s.push_back({"simulation", "mu_per_s", "1/s", "secretion rate for channel validation", true});
  s.push_back({"simulation", "source_distance_um", "um", "source to receiver-center distance", true});
  s.push_back({"simulation", "kb_values_per_s", "list 1/s", "unbinding rates to sweep", true});
  s.push_back({"simulation", "sample_times_s", "list s", "bound-count sample times", true});
  s.push_back({"simulation", "binding_correction", "-", "sticking-probability multiplier", true});
  return s;
}

}  // namespace

const std::vector<SchemaEntry>& schema() {
  static const std::vector<SchemaEntry> s = build_schema();
  return s;
}

std::string schema_text() {
  std::ostringstream out;
  out << "# configuration schema: section.key  [unit]  description\n";
  std::string last;
  for (const auto& e : schema()) {
    if (e.section != last) {
      out << "[" << e.section << "]\n";
      last = e.section;
    }
    out << "  " << e.key << "  [" << e.unit << "]  " << e.description
        << (e.required ? "" : "  (optional)") << "\n";
  }
  return out.str();
}

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error([&issues] {
        std::ostringstream all;
        all << "configuration invalid (" << issues.size() << " issue"
            << (issues.size() == 1 ? "" : "s") << "):";
        for (const auto& i : issues) all << "\n  - " << i;
        return all.str();
      }()),
      issues_(std::move(issues)) {}

namespace {

struct RawConfig {
  std::map<std::string, std::string> values;  // "section.key" -> value text
};

RawConfig tokenize(const std::string& text, std::vector<std::string>& issues) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      issues.push_back("line " + std::to_string(lineno) + ": key '" + key + "' outside any section");
      continue;
    }
    const std::string full = section + "." + key;
    if (raw.values.count(full))
      issues.push_back("line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
    raw.values[full] = value;
  }
  return raw;
}

class Extractor {
 public:
  Extractor(RawConfig raw, std::vector<std::string>& issues)
      : raw_(std::move(raw)), issues_(issues) {}

  bool has(const std::string& full) const { return raw_.values.count(full) > 0; }

  double number(const std::string& full) {
    const auto it = raw_.values.find(full);
    if (it == raw_.values.end()) {
      missing(full);
      return 0.0;
    }
    consumed_.insert(it->first);
    return parse_number(full, it->second);
  }

  long integer(const std::string& full) {
    const double v = number(full);
    if (v != std::floor(v)) issues_.push_back(full + ": expected an integer, got non-integral value");
    return static_cast<long>(v);
  }

  std::uint64_t seed(const std::string& full) {
    const auto it = raw_.values.find(full);
    if (it == raw_.values.end()) {
      missing(full);
      return 0;
    }
    consumed_.insert(it->first);
    try {
      return std::stoull(it->second);
    } catch (...) {
      issues_.push_back(full + ": expected an unsigned integer, got '" + it->second + "'");
      return 0;
    }
  }

  bool boolean(const std::string& full) {
    const auto it = raw_.values.find(full);
    if (it == raw_.values.end()) {
      missing(full);
      return false;
    }
    consumed_.insert(it->first);
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    issues_.push_back(full + ": expected true or false, got '" + it->second + "'");
    return false;
  }

  std::vector<double> number_list(const std::string& full) {
    const auto it = raw_.values.find(full);
    if (it == raw_.values.end()) {
      missing(full);
      return {};
    }
    consumed_.insert(it->first);
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse_number(full, item));
    }
    if (out.empty()) issues_.push_back(full + ": expected a non-empty comma-separated list");
    return out;
  }

  /// Optional value; returns fallback silently when absent.
  double optional_number(const std::string& full, double fallback) {
    const auto it = raw_.values.find(full);
    if (it == raw_.values.end()) return fallback;
    consumed_.insert(it->first);
    return parse_number(full, it->second);
  }

  void finish() {
    for (const auto& [full, value] : raw_.values) {
      (void)value;
      if (!consumed_.count(full)) issues_.push_back("unknown key '" + full + "'");
    }
  }

 private:
  void missing(const std::string& full) { issues_.push_back("missing required key '" + full + "'"); }

  double parse_number(const std::string& full, const std::string& text) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (...) {
      issues_.push_back(full + ": expected a number, got '" + text + "'");
      return 0.0;
    }
  }

  RawConfig raw_;
  std::vector<std::string>& issues_;
  std::set<std::string> consumed_;
};

channel::ReactionChannelParams extract_channel(Extractor& ex, const std::string& section) {
  channel::ReactionChannelParams p;
  p.diffusion = ex.number(section + ".diffusion_um2_per_s");
  p.k_forward = ex.number(section + ".k_forward_um3_per_s");
  p.k_backward = ex.number(section + ".k_backward_per_s");
  p.k_degradation = ex.number(section + ".k_degradation_per_s");
  p.receiver_radius = ex.number(section + ".receiver_radius_um");
  p.receptor_count = ex.number(section + ".receptor_count");
  p.receptor_radius = ex.number(section + ".receptor_radius_um");
  return p;
}

}  // namespace

harness::ExperimentConfig parse_config(const std::string& text,
                                       const std::vector<std::string>& overrides) {
  std::vector<std::string> issues;
  RawConfig raw = tokenize(text, issues);
  for (const auto& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos || ov.find('.') == std::string::npos || ov.find('.') > eq) {
      issues.push_back("override '" + ov + "': expected section.key=value");
      continue;
    }
    raw.values[trim(ov.substr(0, eq))] = trim(ov.substr(eq + 1));
  }

  Extractor ex(std::move(raw), issues);
  harness::ExperimentConfig cfg;
  cfg.ns_channel = extract_channel(ex, "ns_channel");
  cfg.fc_channel = extract_channel(ex, "fc_channel");
  cfg.sensor_count = static_cast<int>(ex.integer("network.sensor_count"));
  cfg.square_edge = ex.number("network.square_edge_um");
  cfg.min_spacing = ex.number("network.min_spacing_um");
  cfg.target = {ex.number("network.target_x_um"), ex.number("network.target_y_um"),
                ex.number("network.target_z_um")};
  cfg.fc_position = {ex.number("network.fc_x_um"), ex.number("network.fc_y_um"),
                     ex.number("network.fc_z_um")};
  cfg.t1 = ex.number("timing.t1_s");
  cfg.t2 = ex.number("timing.t2_s");
  cfg.tau1 = static_cast<int>(ex.optional_number("detection.tau1", -1.0));
  cfg.omega1 = ex.optional_number("detection.omega1", -1.0);
  cfg.tau2 = static_cast<int>(ex.optional_number("detection.tau2", -1.0));
  cfg.omega2_link = ex.optional_number("detection.omega2_link", -1.0);
  cfg.zeta0 = ex.number("detection.zeta0");
  cfg.zeta_fc = ex.number("detection.zeta_fc");
  cfg.n_secondary = ex.number("detection.n_secondary");
  cfg.mu = ex.number("scenario.mu_per_s");
  cfg.grid_axis_points = static_cast<int>(ex.integer("grid.positions_per_axis"));
  cfg.grid_mu_points = static_cast<int>(ex.integer("grid.mu_grid_points"));
  cfg.master_seed = ex.seed("montecarlo.master_seed");
  cfg.resample_topology = ex.boolean("montecarlo.resample_topology");
  cfg.calibration_trials = ex.integer("montecarlo.calibration_trials");
  cfg.h0_eval_trials = ex.integer("montecarlo.h0_eval_trials");
  cfg.h1_eval_trials = ex.integer("montecarlo.h1_eval_trials");
  cfg.target_pfa = ex.number_list("montecarlo.target_pfa");
  for (double v : ex.number_list("montecarlo.sweep_k")) cfg.sweep_k.push_back(static_cast<int>(v));
  cfg.sweep_target_pfa = ex.number("montecarlo.sweep_target_pfa");
  cfg.sim_dt = ex.number("simulation.dt_s");
  cfg.sim_trials = ex.integer("simulation.trials");
  cfg.sim_mu = ex.number("simulation.mu_per_s");
  cfg.sim_distance = ex.number("simulation.source_distance_um");
  cfg.sim_kb = ex.number_list("simulation.kb_values_per_s");
  cfg.sim_sample_times = ex.number_list("simulation.sample_times_s");
  cfg.binding_correction = ex.number("simulation.binding_correction");
  ex.finish();

  if (!issues.empty()) throw ConfigError(std::move(issues));
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    // split the collected invariant list back into individual issues
    std::vector<std::string> parts;
    std::string msg = e.what();
    const std::string prefix = "ExperimentConfig: ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    std::size_t pos = 0;
    while (pos < msg.size()) {
      const std::size_t next = msg.find("; ", pos);
      parts.push_back(msg.substr(pos, next == std::string::npos ? next : next - pos));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    throw ConfigError(std::move(parts));
  }
  return cfg;
}

harness::ExperimentConfig load_config_file(const std::string& path,
                                           const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string canonical_dump(const harness::ExperimentConfig& cfg) {
  std::ostringstream out;
  auto channel_dump = [&](const char* sec, const channel::ReactionChannelParams& p) {
    out << sec << ".diffusion_um2_per_s=" << fmt(p.diffusion) << '\n'
        << sec << ".k_backward_per_s=" << fmt(p.k_backward) << '\n'
        << sec << ".k_degradation_per_s=" << fmt(p.k_degradation) << '\n'
        << sec << ".k_forward_um3_per_s=" << fmt(p.k_forward) << '\n'
        << sec << ".receiver_radius_um=" << fmt(p.receiver_radius) << '\n'
        << sec << ".receptor_count=" << fmt(p.receptor_count) << '\n'
        << sec << ".receptor_radius_um=" << fmt(p.receptor_radius) << '\n';
  };
  auto list_dump = [&](const char* key, const std::vector<double>& v) {
    out << key << '=';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << fmt(v[i]);
    out << '\n';
  };
  out << "detection.n_secondary=" << fmt(cfg.n_secondary) << '\n';
  out << "detection.omega1=" << fmt(cfg.omega1) << '\n';
  out << "detection.omega2_link=" << fmt(cfg.omega2_link) << '\n';
  out << "detection.tau1=" << cfg.tau1 << '\n';
  out << "detection.tau2=" << cfg.tau2 << '\n';
  out << "detection.zeta0=" << fmt(cfg.zeta0) << '\n';
  out << "detection.zeta_fc=" << fmt(cfg.zeta_fc) << '\n';
  channel_dump("fc_channel", cfg.fc_channel);
  out << "grid.mu_grid_points=" << cfg.grid_mu_points << '\n';
  out << "grid.positions_per_axis=" << cfg.grid_axis_points << '\n';
  out << "montecarlo.calibration_trials=" << cfg.calibration_trials << '\n';
  out << "montecarlo.h0_eval_trials=" << cfg.h0_eval_trials << '\n';
  out << "montecarlo.h1_eval_trials=" << cfg.h1_eval_trials << '\n';
  out << "montecarlo.master_seed=" << cfg.master_seed << '\n';
  out << "montecarlo.resample_topology=" << (cfg.resample_topology ? "true" : "false") << '\n';
  {
    std::vector<double> ks(cfg.sweep_k.begin(), cfg.sweep_k.end());
    list_dump("montecarlo.sweep_k", ks);
  }
  out << "montecarlo.sweep_target_pfa=" << fmt(cfg.sweep_target_pfa) << '\n';
  list_dump("montecarlo.target_pfa", cfg.target_pfa);
  out << "network.fc_x_um=" << fmt(cfg.fc_position.x()) << '\n';
  out << "network.fc_y_um=" << fmt(cfg.fc_position.y()) << '\n';
  out << "network.fc_z_um=" << fmt(cfg.fc_position.z()) << '\n';
  out << "network.min_spacing_um=" << fmt(cfg.min_spacing) << '\n';
  out << "network.sensor_count=" << cfg.sensor_count << '\n';
  out << "network.square_edge_um=" << fmt(cfg.square_edge) << '\n';
  out << "network.target_x_um=" << fmt(cfg.target.x()) << '\n';
  out << "network.target_y_um=" << fmt(cfg.target.y()) << '\n';
  out << "network.target_z_um=" << fmt(cfg.target.z()) << '\n';
  channel_dump("ns_channel", cfg.ns_channel);
  out << "scenario.mu_per_s=" << fmt(cfg.mu) << '\n';
  out << "simulation.binding_correction=" << fmt(cfg.binding_correction) << '\n';
  out << "simulation.dt_s=" << fmt(cfg.sim_dt) << '\n';
  list_dump("simulation.kb_values_per_s", cfg.sim_kb);
  out << "simulation.mu_per_s=" << fmt(cfg.sim_mu) << '\n';
  list_dump("simulation.sample_times_s", cfg.sim_sample_times);
  out << "simulation.source_distance_um=" << fmt(cfg.sim_distance) << '\n';
  out << "simulation.trials=" << cfg.sim_trials << '\n';
  out << "timing.t1_s=" << fmt(cfg.t1) << '\n';
  out << "timing.t2_s=" << fmt(cfg.t2) << '\n';
  return out.str();
}

std::uint64_t config_hash(const harness::ExperimentConfig& cfg) {
  const std::string dump = canonical_dump(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mcdet::config
