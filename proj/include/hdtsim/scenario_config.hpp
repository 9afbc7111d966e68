#pragma once

#include <string>
#include <vector>

#include "hdtsim/sim_engine.hpp"

namespace hdt {

/// Thrown on malformed configuration; message carries a path-qualified hint.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Names understood by preset(); order matches the case studies.
const std::vector<std::string>& preset_names();

/// A fully populated scenario for one of the shipped case studies.
ScenarioSpec preset(const std::string& name);

/// Parses a JSON document into a validated spec. Unspecified fields keep the
/// nominal defaults; unknown keys are rejected. `base_dir` resolves relative
/// frequency-profile CSV paths.
ScenarioSpec spec_from_json_text(const std::string& text, const std::string& base_dir = ".");

/// Serializes a spec back to JSON (round-trips through spec_from_json_text).
std::string spec_to_json_text(const ScenarioSpec& spec);

/// Loads either a preset name or a JSON config file.
ScenarioSpec load_scenario(const std::string& preset_or_path);

}  // namespace hdt
