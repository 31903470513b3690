#include "specgrid/mdp.hpp"

#include <algorithm>
#include <string>

#include "specgrid/error.hpp"
#include "specgrid/kernels.hpp"

namespace specgrid {

RadioAction RadioAction::from_flat(std::size_t flat, std::size_t n_p, std::size_t n_f) {
  if (flat >= n_p * n_f) throw DimensionError("flat action index out of range");
  return {flat / n_f, flat % n_f, flat};
}

RadioAction RadioAction::from_parts(std::size_t power, std::size_t freq, std::size_t n_p,
                                    std::size_t n_f) {
  if (power >= n_p || freq >= n_f) throw DimensionError("action component out of range");
  return {power, freq, power * n_f + freq};
}

std::vector<RadioAction> action_catalog(std::size_t n_p, std::size_t n_f) {
  std::vector<RadioAction> out;
  out.reserve(n_p * n_f);
  for (std::size_t flat = 0; flat < n_p * n_f; ++flat) {
    out.push_back(RadioAction::from_flat(flat, n_p, n_f));
  }
  return out;
}

void validate(const RewardConstants& rc, std::size_t n_p) {
  if (rc.c1_per_power.size() != n_p) {
    throw ConfigError("reward c1_per_power must have one entry per power level");
  }
  for (double c : rc.c1_per_power) {
    if (!(c <= 0.0)) throw ConfigError("reward constants must be <= 0");
  }
  if (!(rc.c2_assigned <= 0.0) || !(rc.c2_other <= 0.0) || !(rc.c3_failure <= 0.0)) {
    throw ConfigError("reward constants must be <= 0");
  }
  if (!(rc.c2_other < rc.c2_assigned)) {
    throw ConfigError("c2_other must be strictly below c2_assigned");
  }
}

double reward(bool success, std::size_t power_index, std::size_t frequency_index,
              std::size_t assigned_frequency, const RewardConstants& rc) {
  if (!success) return rc.c3_failure;
  const double c2 = frequency_index == assigned_frequency ? rc.c2_assigned : rc.c2_other;
  return rc.c1_per_power.at(power_index) + c2;
}

void BufferModel::advance(bool delivered) {
  const long next = static_cast<long>(occupancy) + static_cast<long>(arrivals_per_slot) -
                    (delivered ? 1L : 0L);
  occupancy = static_cast<std::size_t>(std::clamp(next, 0L, static_cast<long>(capacity)));
}

AgentState build_state(std::size_t pair_id, std::span<const LinkPositions> positions,
                       const SlotFeedback& feedback, const BufferModel& buffer, std::size_t k,
                       const StateNormalization& norm) {
  if (k < 1) throw ConfigError("K must be at least 1");
  AgentState s(k);
  const std::vector<double> d = distances_to_receivers(pair_id, positions);
  auto slots = s.distances();
  for (std::size_t i = 0; i < k; ++i) {
    slots[i] = i < d.size() ? std::min(d[i] / norm.distance_scale, 1.0) : 1.0;
  }
  s.buffer_occupancy() = static_cast<double>(buffer.occupancy) / norm.buffer_capacity;
  s.interference_caused() = std::min(feedback.interference_caused / norm.interference_scale, 1.0);
  s.interference_sensed() =
      feedback.acked ? std::min(feedback.interference_sensed / norm.interference_scale, 1.0)
                     : kNoAckSentinel;
  return s;
}

Environment::Environment(NetworkScenario scenario, EnvConfig config, std::uint64_t seed)
    : scenario_(std::move(scenario)), config_(std::move(config)), rng_(seed) {
  validate(scenario_);
  validate(config_.rewards, scenario_.n_p());
  if (config_.k < 1) throw ConfigError("K must be at least 1");
  if (config_.buffer_capacity < 1) throw ConfigError("buffer capacity must be at least 1");
  if (!(config_.max_distance > 0.0)) throw ConfigError("max distance must be positive");
  norm_.distance_scale = config_.max_distance;
  norm_.interference_scale =
      static_cast<double>(config_.k) * dbm_to_watts(scenario_.power_levels_dbm.back());
  norm_.buffer_capacity = static_cast<double>(config_.buffer_capacity);
  positions_ = initial_positions(scenario_);
  const std::size_t occ = std::min(config_.initial_occupancy, config_.buffer_capacity);
  buffers_.assign(n_pairs(), BufferModel{config_.buffer_capacity, config_.arrivals_per_slot, occ});
  feedback_.assign(n_pairs(), SlotFeedback{});
}

AgentState Environment::state(std::size_t pair_id) const {
  return build_state(pair_id, positions_, feedback_.at(pair_id), buffers_.at(pair_id), config_.k,
                     norm_);
}

std::vector<AgentState> Environment::states() const {
  std::vector<AgentState> out;
  out.reserve(n_pairs());
  for (std::size_t i = 0; i < n_pairs(); ++i) out.push_back(state(i));
  return out;
}

EnvStepResult Environment::step(std::span<const RadioAction> actions) {
  const std::size_t n = n_pairs();
  if (actions.size() != n) {
    throw DimensionError("env step: expected " + std::to_string(n) + " actions, got " +
                         std::to_string(actions.size()));
  }
  std::vector<Transmission> tx(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (actions[i].power_index >= scenario_.n_p() || actions[i].frequency_index >= scenario_.n_f) {
      throw DimensionError("env step: action out of range for pair " + std::to_string(i));
    }
    tx[i] = {actions[i].power_index, actions[i].frequency_index, buffers_[i].occupancy > 0};
  }

  const std::vector<double> sinr = kernels::sinr_all(scenario_, positions_, tx, kernels::Exec::Serial);
  const ChannelParams& ch = scenario_.channel;

  EnvStepResult result;
  result.pairs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    PairOutcome& out = result.pairs[i];
    out.transmitted = tx[i].transmitting;
    out.sinr_db = sinr[i];
    out.success = tx[i].transmitting && transmission_success(sinr[i], ch);
  }

  // Feedback for the next observation.
  for (std::size_t i = 0; i < n; ++i) {
    SlotFeedback fb;
    fb.acked = result.pairs[i].success;
    if (tx[i].transmitting) {
      const double p_i = dbm_to_watts(scenario_.power_levels_dbm[tx[i].power_index]);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !tx[j].transmitting || tx[j].frequency_index != tx[i].frequency_index) {
          continue;
        }
        fb.interference_caused += path_gain(positions_[i].tx, positions_[j].rx, ch) * p_i;
        fb.interference_sensed += path_gain(positions_[j].tx, positions_[i].rx, ch) *
                                  dbm_to_watts(scenario_.power_levels_dbm[tx[j].power_index]);
      }
    }
    feedback_[i] = fb;
    buffers_[i].advance(result.pairs[i].success);
  }

  positions_ = step_mobility(positions_, scenario_.mobility, scenario_.area_w, scenario_.area_h, rng_);

  for (std::size_t i = 0; i < n; ++i) {
    PairOutcome& out = result.pairs[i];
    out.reward = out.transmitted ? reward(out.success, tx[i].power_index, tx[i].frequency_index,
                                          scenario_.pairs[i].assigned_frequency, config_.rewards)
                                 : 0.0;
    out.next_state = state(i);
  }
  return result;
}

}  // namespace specgrid
