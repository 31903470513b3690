#pragma once

#include "specgrid/error.hpp"

namespace specgrid::json_strict {

template <typename T>
void read_optional(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace specgrid::json_strict
