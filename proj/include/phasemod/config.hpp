#pragma once

#include <string>
#include <vector>

#include "phasemod/experiments.hpp"

namespace phasemod {

// Parses a JSON experiment config. Missing fields are filled from the named
// bundled profile ("paper-device" by default, "bare" for no defaults).
// Units are fixed: GHz, Phi0, seconds, radians. Schema or invariant
// violations throw config_error naming the field and constraint.
ExperimentConfig parse_config(const std::string& path,
                              const std::string& profile = "paper-device");

// Same, from a JSON string (used by tests and the profile-only CLI path).
ExperimentConfig parse_config_text(const std::string& json_text,
                                   const std::string& profile = "paper-device");

// Bundled profile as a JSON string. Known names: paper-device,
// off-sweet-first-order, param-res-sweet, param-res-off-sweet, amplitude-sweep,
// coupler-sweep, expansion-comparison, single-qubit-spectrum, bare.
std::string bundled_profile(const std::string& name);
std::vector<std::string> bundled_profile_names();

// Canonical serialization of the effective config (sorted keys, full
// precision); its FNV-1a hash identifies a run in the output metadata.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

} // namespace phasemod
