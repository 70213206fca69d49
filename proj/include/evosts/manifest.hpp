#pragma once

#include "evosts/evolution.hpp"

#include <nlohmann/json.hpp>

namespace evosts {

/// Config snapshot embedded in run and report manifests.
nlohmann::json evo_config_json(const EvoConfig& cfg);

} // namespace evosts
