#pragma once

#include <span>
#include <string>
#include <vector>

#include "specgrid/checkpoint.hpp"
#include "specgrid/dqn.hpp"
#include "specgrid/kernels.hpp"

namespace specgrid {

/// Elementwise mean of the parameters of identically shaped networks.
QNetwork average_models(std::span<const QNetwork> models,
                        kernels::Exec exec = kernels::Exec::Serial);
QNetwork average_models(std::span<const QNetwork* const> models,
                        kernels::Exec exec = kernels::Exec::Serial);

/// Mean of the agents' online networks.
QNetwork average_agents(std::span<const Agent> agents, kernels::Exec exec = kernels::Exec::Serial);

/// Copies `model` into every agent's online and target network. Replay
/// memories are left untouched.
void broadcast(const QNetwork& model, std::span<Agent> agents);

/// Loads every named checkpoint and averages them. Names may repeat.
QNetwork aggregate_checkpoints(const CheckpointStore& store, std::span<const std::string> names,
                               kernels::Exec exec = kernels::Exec::Serial);

}  // namespace specgrid
