#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance run.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "specgrid/dqn.hpp"
#include "specgrid/net_model.hpp"
#include "specgrid/rng.hpp"

namespace testing {

using namespace specgrid;

// Brute-force reference: build the full received-power matrix, then read
// the SINR of pair i off it.
inline double oracle_sinr_linear(const NetworkScenario& s, std::span<const LinkPositions> pos,
                          std::span<const Transmission> act, std::size_t i) {
  const std::size_t n = pos.size();
  const auto& ch = s.channel;
  std::vector<std::vector<double>> rx_power(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t t = 0; t < n; ++t) {
      const double dx = pos[t].tx.x - pos[r].rx.x;
      const double dy = pos[t].tx.y - pos[r].rx.y;
      double d = std::sqrt(dx * dx + dy * dy);
      if (d < ch.reference_distance) d = ch.reference_distance;
      const double watts = std::pow(10.0, s.power_levels_dbm[act[t].power_index] / 10.0) / 1000.0;
      rx_power[r][t] = watts * std::exp(ch.path_loss_exponent * std::log(ch.reference_distance / d));
    }
  }
  double interference = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t == i || !act[t].transmitting) continue;
    if (act[t].frequency_index == act[i].frequency_index) interference += rx_power[i][t];
  }
  return rx_power[i][i] / (ch.noise_power + interference / ch.processing_gain);
}

inline std::vector<Transmission> decode_joint(std::size_t code, std::size_t n, std::size_t n_p,
                                       std::size_t n_f) {
  std::vector<Transmission> act(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = code % (n_p * n_f + 1);
    code /= n_p * n_f + 1;
    if (a == n_p * n_f) {
      act[i] = {0, 0, false};
    } else {
      act[i] = {a / n_f, a % n_f, true};
    }
  }
  return act;
}

inline AgentState random_state(std::size_t k, Rng& rng) {
  AgentState s(k);
  for (std::size_t i = 0; i < k; ++i) s.distances()[i] = uniform01(rng);
  s.buffer_occupancy() = uniform01(rng);
  s.interference_caused() = uniform01(rng);
  s.interference_sensed() = uniform01(rng) < 0.2 ? kNoAckSentinel : uniform01(rng);
  return s;
}

// A state vector of arbitrary width, for networks whose input is not K+3.
inline AgentState raw_state(std::size_t width, Rng& rng) {
  AgentState s(width - 3);
  for (std::size_t i = 0; i < width - 3; ++i) s.distances()[i] = uniform_real(rng, -1.0, 1.0);
  s.buffer_occupancy() = uniform_real(rng, -1.0, 1.0);
  s.interference_caused() = uniform_real(rng, -1.0, 1.0);
  s.interference_sensed() = uniform_real(rng, -1.0, 1.0);
  return s;
}

inline QNetwork random_net(std::vector<std::size_t> dims, Rng& rng) {
  QNetwork net(std::move(dims));
  for (double& p : net.params()) p = uniform_real(rng, -1.0, 1.0);
  return net;
}

inline double batch_loss(const QNetwork& net, std::span<const Experience* const> batch,
                  std::span<const double> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double e = forward(net, batch[i]->state)[batch[i]->action] - y[i];
    loss += e * e;
  }
  return loss / static_cast<double>(batch.size());
}

// Largest relative disagreement between the analytic gradient and central
// differences; gradients below `floor` in magnitude are compared absolutely.
inline double gradient_error(QNetwork net, std::span<const Experience* const> batch,
                      std::span<const double> y) {
  const LossGradient lg = loss_and_gradient(net, batch, y);
  double worst = 0.0;
  auto p = net.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    const double h = 1e-6 * std::max(1.0, std::abs(keep));
    p[i] = keep + h;
    const double up = batch_loss(net, batch, y);
    p[i] = keep - h;
    const double down = batch_loss(net, batch, y);
    p[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(lg.gradient[i]), 1e-3});
    worst = std::max(worst, std::abs(numeric - lg.gradient[i]) / scale);
  }
  return worst;
}

inline std::vector<const Experience*> pointers(const std::vector<Experience>& v) {
  std::vector<const Experience*> out;
  for (const auto& e : v) out.push_back(&e);
  return out;
}

// Exact sum as a nonoverlapping expansion (Shewchuk), rounded once at the end.
inline double exact_sum(const std::vector<double>& xs) {
  std::vector<double> parts;
  for (double x : xs) {
    std::size_t i = 0;
    for (double y : parts) {
      const double hi = x + y;
      const double lo = std::abs(x) < std::abs(y) ? x - (hi - y) : y - (hi - x);
      if (lo != 0.0) parts[i++] = lo;
      x = hi;
    }
    parts.resize(i);
    parts.push_back(x);
  }
  double s = 0.0;
  for (double p : parts) s += p;
  return s;
}

}  // namespace testing
