#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "amctl/experiment.hpp"

namespace amctl {

// Flat-sectioned key-value text:
//
//   # comment
//   [model]
//   modes = 8              integer
//   horizon = 1.0          float (integer literals are accepted)
//   kernel = "exponential" string
//   [experiment]
//   mu = [1.0, 0.1]        list of numbers
//   quiet = false          bool
//
// Every key has a declared type; unknown sections and keys are rejected with
// the source line.
using ConfigValue = std::variant<std::int64_t, double, bool, std::string, std::vector<double>>;

enum class ConfigType { integer, real, boolean, string, list };

struct ConfigKey {
  std::string section;
  std::string key;
  ConfigType type;
  std::string help;
};

// The accepted schema, in serialization order.
const std::vector<ConfigKey>& config_schema();

class Config {
 public:
  static Config parse(std::string_view text, std::string source = "<config>");
  static Config load(const std::string& path);

  // Canonical text; parse(serialize()) == *this.
  std::string serialize() const;
  // FNV-1a of serialize(), 16 hex digits.
  std::string hash() const;

  bool has(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_real(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

  // Overrides (CLI flags). The value type must match the schema.
  void set(const std::string& section, const std::string& key, ConfigValue value);

  // "source:line" of a key, or "source" if the key was not read from text.
  std::string where(const std::string& section, const std::string& key) const;
  const std::string& source() const { return source_; }

  bool operator==(const Config& other) const { return values_ == other.values_; }

 private:
  struct Entry {
    ConfigValue value;
    int line = 0;
    // Source lines are not part of the value.
    bool operator==(const Entry& other) const { return value == other.value; }
  };
  const Entry* find(const std::string& section, const std::string& key) const;

  std::string source_ = "<config>";
  std::map<std::pair<std::string, std::string>, Entry> values_;
};

// Builders. Invalid values raise ConfigError naming section.key.
SpectralModel build_model(const Config& config);
GrowthEnvelope build_envelope(const Config& config, const SpectralModel& model);
SteeringTarget build_target(const Config& config, const SpectralModel& model);
SolveOptions build_solve_options(const Config& config, double horizon);
SweepConfig build_sweep_config(const Config& config);
GammaStudyConfig build_gamma_config(const Config& config);
int build_steps(const Config& config);

}  // namespace amctl
