#include "specgrid/aggregation.hpp"

#include <algorithm>

#include "specgrid/error.hpp"

namespace specgrid {

QNetwork average_models(std::span<const QNetwork* const> models, kernels::Exec exec) {
  if (models.empty()) throw ConfigError("average_models: empty model list");
  const QNetwork& first = *models.front();
  std::vector<std::span<const double>> inputs;
  inputs.reserve(models.size());
  for (const QNetwork* m : models) {
    if (!m->same_architecture(first)) {
      throw DimensionError("average_models: architecture mismatch");
    }
    inputs.push_back(m->params());
  }
  const std::vector<double> mean = kernels::mean_parameters(inputs, exec);
  QNetwork out(first.layer_dims());
  std::copy(mean.begin(), mean.end(), out.params().begin());
  return out;
}

QNetwork average_models(std::span<const QNetwork> models, kernels::Exec exec) {
  std::vector<const QNetwork*> ptrs;
  for (const auto& m : models) ptrs.push_back(&m);
  return average_models(std::span<const QNetwork* const>(ptrs), exec);
}

QNetwork average_agents(std::span<const Agent> agents, kernels::Exec exec) {
  std::vector<const QNetwork*> ptrs;
  for (const auto& a : agents) ptrs.push_back(&a.online);
  return average_models(std::span<const QNetwork* const>(ptrs), exec);
}

void broadcast(const QNetwork& model, std::span<Agent> agents) {
  for (Agent& a : agents) {
    if (!a.online.same_architecture(model) || !a.target.same_architecture(model)) {
      throw DimensionError("broadcast: architecture mismatch");
    }
  }
  for (Agent& a : agents) {
    sync_target(model, a.online);
    sync_target(model, a.target);
  }
}

QNetwork aggregate_checkpoints(const CheckpointStore& store, std::span<const std::string> names,
                               kernels::Exec exec) {
  if (names.empty()) throw ConfigError("aggregate_checkpoints: no checkpoint names");
  std::vector<QNetwork> models;
  std::vector<Architecture> archs;
  for (const auto& name : names) {
    ModelCheckpoint c = store.load(name);
    if (!archs.empty()) require_architecture(c.arch, archs.front(), "checkpoint '" + name + "'");
    archs.push_back(c.arch);
    models.push_back(c.to_network());
  }
  return average_models(std::span<const QNetwork>(models), exec);
}

}  // namespace specgrid
