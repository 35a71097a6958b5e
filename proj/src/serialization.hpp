#pragma once

#include <string>

#include <json.hpp>

#include "logad/pipeline.hpp"

namespace logad {

nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);

}  // namespace logad
