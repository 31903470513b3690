#pragma once

#include <string>
#include <vector>

#include "specgrid/net_model.hpp"

namespace specgrid {

/// Built-in scenarios: six_pair, gen_train_1..5, unseen_10, unseen_15.
std::vector<NetworkScenario> preset_scenarios();

/// Throws ConfigError for an unknown name.
NetworkScenario preset(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace specgrid
