#include "specgrid/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "specgrid/error.hpp"

namespace specgrid {

namespace {

bool inside(const Position& p, double w, double h) {
  return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.x <= w &&
         p.y >= 0.0 && p.y <= h;
}

void fail(const NetworkScenario& s, const std::string& what) {
  const std::string label = s.name.empty() ? "scenario" : "scenario '" + s.name + "'";
  throw ConfigError(label + ": " + what);
}

}  // namespace

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}


void validate(const NetworkScenario& s) {
  if (s.pairs.empty()) fail(s, "at least one pair is required");
  if (!(s.area_w > 0.0) || !(s.area_h > 0.0) || !std::isfinite(s.area_w) ||
      !std::isfinite(s.area_h)) {
    fail(s, "area dimensions must be positive and finite");
  }
  if (s.n_f < 1) fail(s, "n_f must be at least 1");
  if (s.power_levels_dbm.empty()) fail(s, "power_levels_dbm must not be empty");
  for (std::size_t i = 0; i < s.power_levels_dbm.size(); ++i) {
    if (!std::isfinite(s.power_levels_dbm[i])) fail(s, "power levels must be finite");
    if (i > 0 && !(s.power_levels_dbm[i] > s.power_levels_dbm[i - 1])) {
      fail(s, "power_levels_dbm must be strictly increasing");
    }
  }
  const auto& ch = s.channel;
  if (!(ch.path_loss_exponent >= 2.0)) fail(s, "path_loss_exponent must be >= 2");
  if (!(ch.reference_distance > 0.0)) fail(s, "reference_distance must be > 0");
  if (!(ch.noise_power > 0.0)) fail(s, "noise_power must be > 0");
  if (!(ch.processing_gain >= 1.0)) fail(s, "processing_gain must be >= 1");
  if (!std::isfinite(ch.sinr_threshold)) fail(s, "sinr_threshold must be finite");
  if (!(s.mobility.step_size >= 0.0) || !std::isfinite(s.mobility.step_size)) {
    fail(s, "mobility step_size must be >= 0");
  }
  std::set<std::size_t> ids;
  for (const auto& p : s.pairs) {
    if (!ids.insert(p.pair_id).second) {
      fail(s, "duplicate pair_id " + std::to_string(p.pair_id));
    }
    if (p.assigned_frequency >= s.n_f) {
      fail(s, "pair " + std::to_string(p.pair_id) + ": assigned_frequency out of range");
    }
    if (!inside(p.tx_pos, s.area_w, s.area_h) || !inside(p.rx_pos, s.area_w, s.area_h)) {
      fail(s, "pair " + std::to_string(p.pair_id) + ": position outside the area");
    }
    if (p.tx_pos == p.rx_pos) {
      fail(s, "pair " + std::to_string(p.pair_id) + ": tx and rx coincide");
    }
  }
}

std::vector<LinkPositions> initial_positions(const NetworkScenario& scenario) {
  std::vector<LinkPositions> out;
  out.reserve(scenario.pairs.size());
  for (const auto& p : scenario.pairs) {
    out.push_back({p.tx_pos, p.rx_pos});
  }
  return out;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double path_gain(const Position& a, const Position& b, const ChannelParams& ch) {
  const double d = std::max(distance(a, b), ch.reference_distance);
  return std::pow(ch.reference_distance / d, ch.path_loss_exponent);
}

double compute_sinr(const NetworkScenario& scenario,
                    std::span<const LinkPositions> positions,
                    std::span<const Transmission> actions, std::size_t pair_id) {
  const std::size_t n = scenario.pairs.size();
  if (pair_id >= n) {
    throw DimensionError("compute_sinr: pair_id " + std::to_string(pair_id) +
                         " out of range");
  }
  if (positions.size() != n || actions.size() != n) {
    throw DimensionError("compute_sinr: positions/actions do not cover all pairs");
  }
  const ChannelParams& ch = scenario.channel;
  const Transmission& own = actions[pair_id];
  const Position& rx = positions[pair_id].rx;
  const double signal = path_gain(positions[pair_id].tx, rx, ch) *
                        dbm_to_watts(scenario.power_levels_dbm.at(own.power_index));
  double interference = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Transmission& other = actions[j];
    if (j == pair_id || !other.transmitting ||
        other.frequency_index != own.frequency_index) {
      continue;
    }
    interference += path_gain(positions[j].tx, rx, ch) *
                    dbm_to_watts(scenario.power_levels_dbm.at(other.power_index));
  }
  const double sinr = signal / (ch.noise_power + interference / ch.processing_gain);
  return 10.0 * std::log10(sinr);
}

bool transmission_success(double sinr_db, const ChannelParams& ch) {
  return sinr_db >= ch.sinr_threshold;
}

std::vector<LinkPositions> step_mobility(std::span<const LinkPositions> positions,
                                         const MobilityParams& mobility,
                                         double area_w, double area_h, Rng& rng) {
  std::vector<LinkPositions> out(positions.begin(), positions.end());
  if (!mobility.enabled || mobility.step_size == 0.0) {
    return out;
  }
  const double s = mobility.step_size;
  auto move = [&](Position& p) {
    p.x = std::clamp(p.x + uniform_real(rng, -s, s), 0.0, area_w);
    p.y = std::clamp(p.y + uniform_real(rng, -s, s), 0.0, area_h);
  };
  for (auto& link : out) {
    move(link.tx);
    move(link.rx);
  }
  return out;
}

std::vector<double> distances_to_receivers(std::size_t pair_id,
                                           std::span<const LinkPositions> positions) {
  std::vector<double> out;
  if (positions.empty()) return out;
  out.reserve(positions.size() - 1);
  const Position& tx = positions[pair_id].tx;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (j != pair_id) out.push_back(distance(tx, positions[j].rx));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace specgrid
