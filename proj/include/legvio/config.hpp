#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "legvio/estimator.hpp"
#include "legvio/eval.hpp"
#include "legvio/sim.hpp"

namespace legvio {

/// Configuration problem; `keys()` lists the offending entries.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys = {})
      : std::runtime_error(what), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

// ---------------------------------------------------------------------------
// TOML subset: [section], [[array-of-tables]], key = value with numbers,
// booleans, "strings" and single-line arrays of numbers or strings.

using TomlValue = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;
using TomlTable = std::map<std::string, TomlValue>;

struct TomlDocument {
  TomlTable values;                                    // "section.key"
  std::map<std::string, std::vector<TomlTable>> arrays;  // [[name]] tables
};

TomlDocument parse_toml(std::string_view text, const std::string& origin = "<string>");

// ---------------------------------------------------------------------------

struct RunConfig {
  std::string name = "run";
  Scenario scenario;
  EstimatorConfig estimator;
  std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};
  std::vector<std::uint64_t> seeds{1};
  RpeOptions rpe;
};

/// Built-in defaults: realistic sensor noise, tuned filter parameters.
RunConfig default_config();

RunConfig parse_config(std::string_view text, const std::string& origin = "<string>");
/// Throws ConfigError; a missing file is reported as such.
RunConfig load_config(const std::filesystem::path& path);

/// Checks ranges and gait feasibility; throws ConfigError listing keys.
void validate_config(const RunConfig& config);

/// Sets one scalar key ("contact.n_standing", "vio.z_walk_dynamic", ...).
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

/// Every scalar key accepted by the reader.
std::vector<std::string> config_keys();

/// Canonical TOML rendering (sorted sections and keys, gaits last); reads
/// back into an identical configuration.
std::string dump_config(const RunConfig& config);
/// FNV-1a 64 of the canonical dump without the seed list, hex.
std::string config_hash(const RunConfig& config);

}  // namespace legvio
