#pragma once

// Multi-agent training loops: per-network training with periodic model
// averaging, the independent baseline, the multi-network protocol
// (pre-train each network, average the checkpoints, fine-tune round-robin)
// and frozen-policy evaluation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "specgrid/checkpoint.hpp"
#include "specgrid/dqn.hpp"
#include "specgrid/mdp.hpp"
#include "specgrid/metrics.hpp"
#include "specgrid/net_model.hpp"

namespace specgrid {

struct TrainConfig {
  Hyperparams hyper;
  EnvConfig env;
  std::size_t total_steps = 5000;
  bool aggregation = true;
  std::size_t individual_steps = 8000;
  std::size_t finetune_steps_per_network = 1000;
  std::size_t finetune_loops = 6;
  std::size_t eval_steps = 2000;
  std::vector<std::uint64_t> seeds{1};
  double epsilon_restart = 0.2;
  std::size_t success_window = 100;
  bool parallel = false;
};

void validate(const TrainConfig& config);

nlohmann::json train_config_to_json(const TrainConfig& config);
/// Strict: unknown keys rejected, missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& doc);

std::vector<std::size_t> network_dims(const TrainConfig& config, std::size_t n_actions);
Architecture architecture_for(const TrainConfig& config, const NetworkScenario& scenario);

/// The shared initial model every agent starts from for a given run seed.
QNetwork fresh_model(const TrainConfig& config, const NetworkScenario& scenario,
                     std::uint64_t seed);

struct TrainHooks {
  /// Called right after each aggregation barrier with the step count so far.
  std::function<void(std::size_t, std::span<const Agent>)> on_barrier;
};

struct RunSpec {
  std::size_t steps = 0;
  bool aggregation = true;
  EpsilonSchedule epsilon;
  std::uint64_t seed = 0;
  const QNetwork* init = nullptr;  // fresh_model(seed) when null
  TrainHooks hooks;
};

struct TrainResult {
  std::vector<QNetwork> models;  // final online network of every agent
  RunMetrics metrics;
};

/// Core loop shared by every training mode.
TrainResult run_training(const NetworkScenario& scenario, const TrainConfig& config,
                         const RunSpec& spec);

/// config.total_steps slots with model averaging every aggregation_period.
TrainResult train_network(const NetworkScenario& scenario, const TrainConfig& config,
                          std::uint64_t seed, const QNetwork* init = nullptr,
                          TrainHooks hooks = {});

/// Same loop without aggregation barriers.
TrainResult train_independent(const NetworkScenario& scenario, const TrainConfig& config,
                              std::uint64_t seed, TrainHooks hooks = {});

/// Every agent runs the same frozen model greedily; nothing is learned.
RunMetrics evaluate(const QNetwork& model, const NetworkScenario& scenario,
                    const TrainConfig& config, std::size_t eval_steps, std::uint64_t seed);

enum class Phase { Individual = 1, Aggregate = 2, FineTune = 3 };

struct Segment {
  Phase phase = Phase::Individual;
  std::size_t loop = 0;
  std::size_t scenario_index = 0;
  std::string scenario_name;
  std::string checkpoint;  // store name written at the end of the segment
  RunMetrics metrics;
};

struct GeneralizedOptions {
  std::string prefix = "gen";
  /// Continue from a checkpoint written by a previous run with the same
  /// scenarios, config and seed.
  std::optional<std::string> resume_from;
};

struct GeneralizedResult {
  QNetwork model;
  std::vector<Segment> segments;  // only the segments executed by this call
};

GeneralizedResult generalized_train(std::span<const NetworkScenario> scenarios,
                                    const TrainConfig& config, std::uint64_t seed,
                                    CheckpointStore& store, const GeneralizedOptions& options = {});

/// Hash of the parameter bytes, for change detection.
std::uint64_t parameter_hash(const QNetwork& net);

}  // namespace specgrid
