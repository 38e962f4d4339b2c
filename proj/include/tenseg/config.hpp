#pragma once

#include "tenseg/harness.hpp"

#include <string>

namespace tenseg {

// JSON config for the experiment runner. Every ExperimentConfig field is
// addressable, including the nested sim/task/gp/acquisition blocks; omitted
// keys keep their defaults and unknown keys are errors.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// full round-trippable dump, defaults included; `tenseg run --dump-config`
std::string experiment_config_to_json(const ExperimentConfig& config);

} // namespace tenseg
