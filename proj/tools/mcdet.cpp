// mcdet -- molecular-communication target-detection workbench CLI.
//
// Subcommands run one experiment each and write CSV artifacts plus a run
// manifest into the output directory:
//   validate-channel   transient mean vs particle simulation  -> channel_validation.csv
//   validate-poisson   bound-count histogram vs Poisson fit   -> poisson_validation.csv
//   roc                detector ROC points                    -> roc.csv
//   sweep-k            missed detection vs sensor count       -> sweepk.csv
//   calibrate          detector thresholds at target P_fa     -> thresholds.csv

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcdet/config.hpp"
#include "mcdet/experiments.hpp"
#include "mcdet/parallel.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned workers = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "parameter file (see --schema)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out_dir, "output directory (default: $MCDET_OUT_DIR or .)");
  cmd->add_option("--seed", opt.seed, "master seed override")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
  cmd->add_option("--workers", opt.workers, "worker thread count (default: hardware)");
  cmd->add_option("--set", opt.overrides, "config override, section.key=value (repeatable)");
}

std::string resolve_out_dir(const CommonOptions& opt) {
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (const char* env = std::getenv("MCDET_OUT_DIR"); env && *env) return env;
  return ".";
}

struct RunRecorder {
  std::string experiment;
  std::string out_dir;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write_manifest(const mcdet::harness::ExperimentConfig* cfg, unsigned workers,
                      const std::string& error_type, const std::string& error_message) const {
    nlohmann::json m;
    m["experiment"] = experiment;
    m["tool_version"] = kVersion;
    m["compiler"] = __VERSION__;
    if (cfg) {
      char hash[32];
      std::snprintf(hash, sizeof hash, "%016llx",
                    static_cast<unsigned long long>(mcdet::config::config_hash(*cfg)));
      m["config_hash"] = hash;
      m["master_seed"] = cfg->master_seed;
    }
    m["workers"] = workers;
    m["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m["outputs"] = outputs;
    m["warnings"] = warnings;
    if (error_type.empty()) {
      m["error"] = nullptr;
    } else {
      m["error"] = {{"type", error_type}, {"message", error_message}};
    }
    std::ofstream out(std::filesystem::path(out_dir) / "manifest.json");
    out << m.dump(2) << "\n";
  }
};

int run_experiment(const std::string& name, const CommonOptions& opt) {
  RunRecorder rec;
  rec.experiment = name;
  rec.out_dir = resolve_out_dir(opt);
  std::filesystem::create_directories(rec.out_dir);
  const unsigned workers = opt.workers ? opt.workers : mcdet::default_workers();

  mcdet::harness::ExperimentConfig cfg;
  bool cfg_loaded = false;
  try {
    std::vector<std::string> overrides = opt.overrides;
    if (opt.seed_set)
      overrides.push_back("montecarlo.master_seed=" + std::to_string(opt.seed));
    cfg = mcdet::config::load_config_file(opt.config_path, overrides);
    cfg_loaded = true;

    const auto out_path = [&](const char* file) {
      rec.outputs.push_back(file);
      return (std::filesystem::path(rec.out_dir) / file).string();
    };

    if (name == "validate-channel") {
      const auto rows = mcdet::harness::run_validate_channel(cfg, workers);
      mcdet::harness::write_channel_validation_csv(out_path("channel_validation.csv"), rows);
    } else if (name == "validate-poisson") {
      const auto rows = mcdet::harness::run_validate_poisson(cfg, workers);
      mcdet::harness::write_poisson_validation_csv(out_path("poisson_validation.csv"), rows);
    } else if (name == "roc") {
      const auto result = mcdet::harness::run_roc(cfg, workers);
      rec.warnings = result.warnings;
      mcdet::harness::write_roc_csv(out_path("roc.csv"), result);
    } else if (name == "sweep-k") {
      const auto result = mcdet::harness::run_sweep_k(cfg, workers);
      rec.warnings = result.warnings;
      mcdet::harness::write_sweep_csv(out_path("sweepk.csv"), result);
    } else if (name == "calibrate") {
      const auto rows = mcdet::harness::run_calibrate(cfg, workers);
      mcdet::harness::write_calibration_csv(out_path("thresholds.csv"), rows);
    }
    rec.write_manifest(&cfg, workers, "", "");
    for (const auto& w : rec.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    rec.write_manifest(cfg_loaded ? &cfg : nullptr, workers, typeid(e).name(), e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"molecular-communication target-detection workbench"};
  app.set_version_flag("--version", kVersion);
  bool show_schema = false;
  app.add_flag("--schema", show_schema, "print the configuration schema and exit");

  const std::vector<std::string> names = {"validate-channel", "validate-poisson", "roc",
                                          "sweep-k", "calibrate"};
  const std::vector<std::string> descs = {
      "analytical transient mean vs particle-based simulation",
      "bound-count histogram vs the Poisson approximation",
      "missed-detection vs false-alarm curves for GAD/G-LRT/G-LOD",
      "missed detection vs sensor count at fixed false alarm",
      "detector thresholds for the configured false-alarm targets"};
  std::vector<CommonOptions> opts(names.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < names.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(names[i], descs[i]);
    add_common(cmd, opts[i]);
    cmds.push_back(cmd);
  }
  app.require_subcommand(0, 1);

  CLI11_PARSE(app, argc, argv);

  if (show_schema) {
    std::cout << mcdet::config::schema_text();
    return 0;
  }
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (cmds[i]->parsed()) return run_experiment(names[i], opts[i]);
  }
  std::cerr << app.help();
  return 2;
}
