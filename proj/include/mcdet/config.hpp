#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcdet/experiments.hpp"

namespace mcdet::config {

struct SchemaEntry {
  std::string section;
  std::string key;
  std::string unit;
  std::string description;
  bool required = true;
};

/// Canonical key set; one key per model parameter, units documented.
const std::vector<SchemaEntry>& schema();
/// Human-readable schema dump (section.key, unit, description).
std::string schema_text();

/// Parse failure carrying every diagnostic, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Parses flat sectioned key=value text ('#'/';' comments) into a validated
/// ExperimentConfig. `overrides` entries take "section.key=value" form and are
/// applied before validation. Unknown sections/keys are rejected; missing
/// required keys and invariant violations are reported exhaustively.
harness::ExperimentConfig parse_config(const std::string& text,
                                       const std::vector<std::string>& overrides = {});

harness::ExperimentConfig load_config_file(const std::string& path,
                                           const std::vector<std::string>& overrides = {});

/// Canonical "section.key=value" dump (sorted, %.17g numbers) of the parsed
/// configuration; the run manifest hashes this string.
std::string canonical_dump(const harness::ExperimentConfig& cfg);

/// FNV-1a 64-bit over the canonical dump.
std::uint64_t config_hash(const harness::ExperimentConfig& cfg);

}  // namespace mcdet::config
