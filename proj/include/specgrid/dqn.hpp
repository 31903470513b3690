#pragma once

// Deep Q-network pieces: a two-hidden-layer ReLU MLP with a linear head,
// uniform experience replay, epsilon-greedy selection and plain SGD on the
// mean squared TD error against a lagged target network.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "specgrid/mdp.hpp"
#include "specgrid/rng.hpp"

namespace specgrid {

/// Parameters of a fully connected network stored as one flat vector in
/// canonical order: for each layer, weights row-major (out x in), then biases.
class QNetwork {
 public:
  QNetwork() = default;
  /// Zero-initialized network. dims = {input, hidden1, hidden2, output}.
  explicit QNetwork(std::vector<std::size_t> dims);

  /// Uniform Glorot initialization, zero biases.
  static QNetwork glorot(std::vector<std::size_t> dims, Rng& rng);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t n_layers() const { return dims_.size() - 1; }
  std::size_t input_size() const { return dims_.front(); }
  std::size_t output_size() const { return dims_.back(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + dims_[layer] * dims_[layer + 1];
  }
  double& weight(std::size_t layer, std::size_t out, std::size_t in) {
    return params_[weight_offset(layer) + out * dims_[layer] + in];
  }
  double& bias(std::size_t layer, std::size_t out) { return params_[bias_offset(layer) + out]; }

  bool same_architecture(const QNetwork& other) const { return dims_ == other.dims_; }
  bool all_finite() const;

  friend bool operator==(const QNetwork&, const QNetwork&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Number of parameters for a layer chain: sum of in*out + out.
std::size_t parameter_count(std::span<const std::size_t> dims);

std::vector<double> forward(const QNetwork& net, std::span<const double> state);
inline std::vector<double> forward(const QNetwork& net, const AgentState& state) {
  return forward(net, state.values());
}

/// Epsilon-greedy choice. Always consumes one uniform draw, plus one index
/// draw when exploring; the greedy branch breaks ties toward the lowest index.
std::size_t select_action(std::span<const double> q_values, double epsilon, Rng& rng);

std::size_t argmax(std::span<const double> values);

struct Experience {
  AgentState state;
  std::size_t action = 0;
  double reward = 0.0;
  AgentState next_state;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  std::uint64_t pushed() const { return pushed_; }

  void push(Experience e);
  /// Oldest-first view position i (0 = oldest).
  const Experience& at(std::size_t i) const;

  /// batch_size distinct entries drawn uniformly. Throws if undersized.
  std::vector<const Experience*> sample(std::size_t batch_size, Rng& rng) const;
  /// The underlying index draw, exposed for determinism checks.
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Experience> items_;
  std::size_t head_ = 0;  // slot of the oldest item once full
  std::uint64_t pushed_ = 0;
};

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::size_t decay_steps = 2000;
};

double epsilon_at(std::size_t step, const EpsilonSchedule& schedule);

/// sum_t gamma^t * rewards[t], accumulated back to front.
double discounted_return(std::span<const double> rewards, double gamma);

struct Hyperparams {
  double gamma = 0.7;
  double alpha = 1e-2;
  std::size_t batch_size = 32;
  std::size_t target_sync_period = 100;
  EpsilonSchedule epsilon;
  std::size_t aggregation_period = 50;
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 64;
  std::size_t replay_capacity = 10000;
};

void validate(const Hyperparams& h);

std::vector<double> td_targets(std::span<const Experience* const> batch,
                               const QNetwork& target_net, double gamma);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // canonical parameter order
};

/// Mean over samples of (target - q(state, action))^2 and its gradient.
LossGradient loss_and_gradient(const QNetwork& net, std::span<const Experience* const> batch,
                               std::span<const double> targets);

/// One SGD step on the batch; returns the loss before the step.
double train_batch(QNetwork& net, const QNetwork& target_net,
                   std::span<const Experience* const> batch, const Hyperparams& hyper);

void sync_target(const QNetwork& net, QNetwork& target_net);

/// One learner: online and target networks, replay memory and RNG stream.
struct Agent {
  QNetwork online;
  QNetwork target;
  ReplayBuffer replay;
  Rng rng;
  std::uint64_t learn_steps = 0;

  Agent(QNetwork init, std::size_t replay_capacity, std::uint64_t seed);
};

}  // namespace specgrid
