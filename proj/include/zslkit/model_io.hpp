#pragma once

#include "zslkit/classifier.hpp"
#include "zslkit/regression.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace zslkit {

/// Version written into, and required from, every model container.
inline constexpr int model_format_version = 1;

// Model container layout (docs/model_format.md):
//   { "format": "zslkit-model", "version": 1, "schema": "semantic_regressor" | "svc", ... }

[[nodiscard]] nlohmann::ordered_json regressor_to_json(const SemanticRegressor &regressor);
[[nodiscard]] SemanticRegressor regressor_from_json(const nlohmann::json &json);
void save_regressor(const SemanticRegressor &regressor, const std::filesystem::path &path);
[[nodiscard]] SemanticRegressor load_regressor(const std::filesystem::path &path);

[[nodiscard]] nlohmann::ordered_json classifier_to_json(const SvcModel &model);
[[nodiscard]] SvcModel classifier_from_json(const nlohmann::json &json);
void save_classifier(const SvcModel &model, const std::filesystem::path &path);
[[nodiscard]] SvcModel load_classifier(const std::filesystem::path &path);

[[nodiscard]] nlohmann::ordered_json kernel_to_json(const KernelSpec &kernel);
[[nodiscard]] KernelSpec kernel_from_json(const nlohmann::json &json);

}  // namespace zslkit
