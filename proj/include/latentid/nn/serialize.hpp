#pragma once

#include <filesystem>
#include <utility>

#include "latentid/nn/mlp.hpp"

#include <json.hpp>

namespace latentid::nn {

void to_json(nlohmann::json& j, const MlpSpec& spec);
void from_json(const nlohmann::json& j, MlpSpec& spec);

/// Writes layer_<l>_weight.csv / layer_<l>_bias.csv (Matrix CSV) and a
/// manifest.json holding the spec and the file list.
void save_mlp(const std::filesystem::path& dir, const MlpSpec& spec, const MlpParams& params);
std::pair<MlpSpec, MlpParams> load_mlp(const std::filesystem::path& dir);

}  // namespace latentid::nn
