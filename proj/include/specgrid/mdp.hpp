#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "specgrid/net_model.hpp"
#include "specgrid/rng.hpp"

namespace specgrid {

/// Observation of one agent: K normalized neighbor-receiver distances, then
/// buffer occupancy, interference caused and interference sensed. The layout
/// has length K + 3 regardless of the network size.
class AgentState {
 public:
  AgentState() = default;
  explicit AgentState(std::size_t k) : values_(k + 3, 0.0) {}

  std::size_t k() const { return values_.size() - 3; }
  std::size_t size() const { return values_.size(); }

  std::span<double> distances() { return {values_.data(), k()}; }
  std::span<const double> distances() const { return {values_.data(), k()}; }
  double& buffer_occupancy() { return values_[k()]; }
  double buffer_occupancy() const { return values_[k()]; }
  double& interference_caused() { return values_[k() + 1]; }
  double interference_caused() const { return values_[k() + 1]; }
  double& interference_sensed() { return values_[k() + 2]; }
  double interference_sensed() const { return values_[k() + 2]; }

  std::span<const double> values() const { return values_; }

  friend bool operator==(const AgentState&, const AgentState&) = default;

 private:
  std::vector<double> values_;
};

inline constexpr double kNoAckSentinel = -1.0;

struct RadioAction {
  std::size_t power_index = 0;
  std::size_t frequency_index = 0;
  std::size_t flat_index = 0;

  static RadioAction from_flat(std::size_t flat, std::size_t n_p, std::size_t n_f);
  static RadioAction from_parts(std::size_t power, std::size_t freq, std::size_t n_p,
                                std::size_t n_f);

  friend bool operator==(const RadioAction&, const RadioAction&) = default;
};

/// (power_index, frequency_index) for every flat action, in flat order.
std::vector<RadioAction> action_catalog(std::size_t n_p, std::size_t n_f);

struct RewardConstants {
  std::vector<double> c1_per_power{-0.05, -5.0, -10.0};
  double c2_assigned = -0.05;
  double c2_other = -2.0;
  double c3_failure = -10.0;
};

void validate(const RewardConstants& rc, std::size_t n_p);

double reward(bool success, std::size_t power_index, std::size_t frequency_index,
              std::size_t assigned_frequency, const RewardConstants& rc);

struct BufferModel {
  std::size_t capacity = 10;
  std::size_t arrivals_per_slot = 1;
  std::size_t occupancy = 0;

  /// occupancy <- clamp(occupancy + arrivals - delivered, 0, capacity)
  void advance(bool delivered);
};

/// Feature scales: distances by the sensing range (clamped to 1), interference by K
/// max-power transmitters at the reference distance, buffer by capacity.
struct StateNormalization {
  double distance_scale = 1.0;
  double interference_scale = 1.0;
  double buffer_capacity = 1.0;
};

/// What the transmitter learned about its previous slot.
struct SlotFeedback {
  bool acked = true;
  double interference_caused = 0.0;  // linear watts
  double interference_sensed = 0.0;  // linear watts
};

AgentState build_state(std::size_t pair_id, std::span<const LinkPositions> positions,
                       const SlotFeedback& feedback, const BufferModel& buffer, std::size_t k,
                       const StateNormalization& norm);

struct EnvConfig {
  std::size_t k = 8;
  double max_distance = 50.0;  // metres; farther receivers read as padding
  RewardConstants rewards;
  std::size_t buffer_capacity = 10;
  std::size_t arrivals_per_slot = 1;
  std::size_t initial_occupancy = 10;
};

struct PairOutcome {
  AgentState next_state;
  double reward = 0.0;
  bool success = false;
  bool transmitted = false;
  double sinr_db = 0.0;
};

struct EnvStepResult {
  std::vector<PairOutcome> pairs;
};

/// One wireless network evolving slot by slot under joint actions.
class Environment {
 public:
  Environment(NetworkScenario scenario, EnvConfig config, std::uint64_t seed);

  const NetworkScenario& scenario() const { return scenario_; }
  const EnvConfig& config() const { return config_; }
  std::size_t n_pairs() const { return scenario_.pairs.size(); }
  std::size_t n_actions() const { return scenario_.n_p() * scenario_.n_f; }
  std::size_t state_size() const { return config_.k + 3; }
  const StateNormalization& normalization() const { return norm_; }

  std::span<const LinkPositions> positions() const { return positions_; }
  std::span<const BufferModel> buffers() const { return buffers_; }
  std::span<const SlotFeedback> feedback() const { return feedback_; }

  AgentState state(std::size_t pair_id) const;
  std::vector<AgentState> states() const;

  /// Executes one slot. Throws DimensionError on an action count mismatch.
  EnvStepResult step(std::span<const RadioAction> actions);

 private:
  NetworkScenario scenario_;
  EnvConfig config_;
  StateNormalization norm_;
  Rng rng_;
  std::vector<LinkPositions> positions_;
  std::vector<BufferModel> buffers_;
  std::vector<SlotFeedback> feedback_;
};

}  // namespace specgrid
