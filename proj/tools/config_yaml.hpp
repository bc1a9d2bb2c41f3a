#pragma once

#include <string>

#include "rollforge/pipeline.hpp"

namespace rollforge::tools {

// YAML run configuration: one mapping per module section plus top-level
// `seed`, `out`, `rl_seeds` and `arms`. Unknown keys are rejected so typos
// fail loudly. A commented example ships in configs/desk.yaml.
pipeline::RunConfig load_config(const std::string& path);

}  // namespace rollforge::tools
