#pragma once

#include <filesystem>

#include <json.hpp>

#include "prd/nets/model.hpp"

namespace prd::nets {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json params_to_json(const ParamSet& params);
// Copies values into `params`; names and shapes must match exactly.
void params_from_json(const nlohmann::json& j, ParamSet& params);

// JSON document: versioned header, model dimensions, named tensors with
// shapes (row-major data), PopArt statistics and caller metadata.
nlohmann::json checkpoint_to_json(const Model& model, const nlohmann::json& metadata);
Model model_from_checkpoint(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const nlohmann::json& metadata);
// Throws ConfigError when the file is missing, unreadable or of another version.
nlohmann::json read_checkpoint(const std::filesystem::path& path);

}  // namespace prd::nets
