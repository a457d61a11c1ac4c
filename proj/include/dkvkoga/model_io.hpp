#pragma once

#include <string>

#include <json.hpp>

#include "dkvkoga/greedy.hpp"

namespace dkv {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const SurrogateModel& model);
SurrogateModel model_from_json(const nlohmann::json& j);

/// JSON model file with a format_version field; the save/load round trip
/// reproduces predictions bit-identically.
void save_model(const SurrogateModel& model, const std::string& path);
SurrogateModel load_model(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json kernel_to_json(const ScalarKernel& k);
ScalarKernel kernel_from_json(const nlohmann::json& j);

} // namespace dkv
