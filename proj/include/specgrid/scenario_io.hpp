#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "specgrid/net_model.hpp"

namespace specgrid {

inline constexpr int kScenarioSchemaVersion = 1;

nlohmann::json scenario_to_json(const NetworkScenario& scenario);

/// Strict decoding: schema_version must be 1, unknown keys are rejected and
/// the result is validated. Missing optional blocks take their defaults.
NetworkScenario scenario_from_json(const nlohmann::json& doc);

NetworkScenario load_scenario(const std::filesystem::path& path);
void save_scenario(const NetworkScenario& scenario, const std::filesystem::path& path);

/// Helpers shared by the other strict JSON readers.
namespace json_strict {

void require_object(const nlohmann::json& j, const std::string& where);
void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                    const std::string& where);
void require_schema_version(const nlohmann::json& j, int expected, const std::string& where);

template <typename T>
void read_optional(const nlohmann::json& j, const char* key, T& out, const std::string& where);

}  // namespace json_strict

}  // namespace specgrid

#include "specgrid/scenario_io_impl.hpp"
