#pragma once

// Geometry, radio channel and interference model for a set of Tx-Rx pairs
// sharing a DS-CDMA band split into n_f frequencies.
//
// Interference is modelled with a scalar processing gain: co-channel
// interference at a receiver is divided by the spreading gain before it is
// added to the noise floor. Signals on other frequencies never interfere.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specgrid/rng.hpp"

namespace specgrid {

struct Position {
  double x = 0.0;  // meters
  double y = 0.0;  // meters

  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

struct TxRxPair {
  std::size_t pair_id = 0;
  Position tx_pos;
  Position rx_pos;
  std::size_t assigned_frequency = 0;
};

struct ChannelParams {
  double path_loss_exponent = 3.0;
  double reference_distance = 1.0;  // meters
  double noise_power = 1e-10;       // watts
  double processing_gain = 64.0;
  double sinr_threshold = 20.0;     // dB
};

struct MobilityParams {
  double step_size = 0.0;  // meters per slot, per coordinate
  bool enabled = false;
};

struct NetworkScenario {
  std::string name;
  std::vector<TxRxPair> pairs;
  double area_w = 100.0;
  double area_h = 100.0;
  ChannelParams channel;
  MobilityParams mobility;
  std::vector<double> power_levels_dbm{1.0, 10.0, 20.0};
  std::size_t n_f = 2;
  std::uint64_t seed = 0;

  std::size_t n_pairs() const { return pairs.size(); }
  std::size_t n_p() const { return power_levels_dbm.size(); }
};

/// Throws ConfigError naming the first violated invariant.
void validate(const NetworkScenario& scenario);

/// Current transmitter/receiver coordinates of one pair.
struct LinkPositions {
  Position tx;
  Position rx;

  friend bool operator==(const LinkPositions&, const LinkPositions&) = default;
};

std::vector<LinkPositions> initial_positions(const NetworkScenario& scenario);

/// What one pair does in a slot.
struct Transmission {
  std::size_t power_index = 0;
  std::size_t frequency_index = 0;
  bool transmitting = true;
};

double dbm_to_watts(double dbm);

/// Log-distance gain (d0 / max(d, d0))^n, always in (0, 1].
double path_gain(const Position& a, const Position& b, const ChannelParams& ch);

/// SINR in dB at pair_id's receiver, using pair_id's own chosen power for the
/// signal term. Only transmitting pairs on the same frequency interfere.
double compute_sinr(const NetworkScenario& scenario,
                    std::span<const LinkPositions> positions,
                    std::span<const Transmission> actions, std::size_t pair_id);

bool transmission_success(double sinr_db, const ChannelParams& ch);

/// Uniform box-step random walk of every node, clamped to the area.
std::vector<LinkPositions> step_mobility(std::span<const LinkPositions> positions,
                                         const MobilityParams& mobility,
                                         double area_w, double area_h, Rng& rng);

/// Sorted distances from pair_id's transmitter to every other receiver.
std::vector<double> distances_to_receivers(std::size_t pair_id,
                                           std::span<const LinkPositions> positions);

}  // namespace specgrid
