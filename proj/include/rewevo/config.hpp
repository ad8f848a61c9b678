#pragma once

// Flat `key = value` configuration with dotted sections, named presets and
// validation. `#` starts a comment. Unknown keys are errors.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rewevo/engine.hpp"

namespace rewevo {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name.
SimulationConfig preset_config(std::string_view name);

// Applies `key = value` lines on top of `base`. Throws ConfigError.
SimulationConfig apply_config_text(std::string_view text, const SimulationConfig &base);
// Applies `key=value` strings (command-line overrides).
SimulationConfig apply_overrides(const std::vector<std::string> &overrides,
                                 const SimulationConfig &base);

// Range and consistency checks. Throws ConfigError.
void validate(const SimulationConfig &config);

// Fully-resolved config; parsing it onto any preset reproduces `config`.
std::string config_to_text(const SimulationConfig &config);

// preset, then file (if any), then overrides; validated.
SimulationConfig load_config(const std::optional<std::string> &path, std::string_view preset,
                             const std::vector<std::string> &overrides);

// All recognised keys in echo order.
std::vector<std::string> config_keys();

bool operator==(const SimulationConfig &a, const SimulationConfig &b);

}  // namespace rewevo
