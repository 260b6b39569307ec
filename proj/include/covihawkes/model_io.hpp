#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "covihawkes/trainer.hpp"
#include "covihawkes/types.hpp"

namespace covihawkes {

inline constexpr std::string_view kModelFormatTag = "covihawkes-model-v1";

/// Self-describing trained model: config echo, every parameter array
/// (base64-encoded little-endian float64, matrices row-major), region id
/// and training seed.
struct ModelFile {
    std::string region;
    ModelConfig config;
    HawkesParams params;
};

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace covihawkes
