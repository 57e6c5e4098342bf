#pragma once

#include "gptemper/data.hpp"
#include "gptemper/inference.hpp"
#include "gptemper/predict.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace gptemper {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kModelFormat = "gptemper-model";

/// Everything needed to predict: the normalized training data, the
/// ensemble and the settings it was trained with.
struct Model {
    Dataset train;
    PosteriorEnsemble ensemble;
    PriorSpec priors;
    KernelForm kernel_form = KernelForm::exponentiated_sum;
    double jitter = 1e-10;
    nlohmann::json config;
};

nlohmann::json config_to_json(const RunConfig& config);

/// FNV-1a of the canonical config JSON, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

void save_model(const Model& model, const std::filesystem::path& path);
/// Throws SchemaError on anything that does not parse as a model file.
Model load_model(const std::filesystem::path& path);

} // namespace gptemper
