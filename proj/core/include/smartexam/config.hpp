#pragma once

#include <string>

#include "smartexam/harness.hpp"
#include "smartexam/simgen.hpp"
#include "smartexam/trial.hpp"

namespace smartexam {

/// Versioned JSON configuration surface. Unknown keys are rejected at every
/// level; schema_version must be 1.
ScenarioConfig scenario_config_from_json(const std::string& json_text);
std::string scenario_config_to_json(const ScenarioConfig& config);

DesignSpec design_spec_from_json(const std::string& json_text);
std::string design_spec_to_json(const DesignSpec& spec);

SyntheticModel model_from_json(const std::string& json_text);
std::string model_to_json(const SyntheticModel& model);

/// Resolves a model reference: "table1" (with association negative/positive)
/// or "adhd" (with scenario S1-S3); anything else must be an inline object.
SyntheticModel resolve_model(const std::string& name, const std::string& association);

/// FNV-1a hash of the raw config bytes, for run manifests.
std::string config_hash(const std::string& text);

}  // namespace smartexam
