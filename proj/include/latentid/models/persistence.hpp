#pragma once

#include <cstdint>
#include <filesystem>

#include "latentid/models/model.hpp"

namespace latentid::models {

/// Model directory: encoder/ and decoder/ (MLP format), prior.json with CSV
/// references for the prior tensors, manifest.json (kind, d_x, d_z, K,
/// decoder_log_var, seed).
void save_model(const std::filesystem::path& dir, const GenerativeModel& model, std::uint64_t seed);
GenerativeModel load_model(const std::filesystem::path& dir);

}  // namespace latentid::models
