#include "specgrid/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "specgrid/error.hpp"

namespace specgrid {

std::size_t parameter_count(std::span<const std::size_t> dims) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    n += dims[l] * dims[l + 1] + dims[l + 1];
  }
  return n;
}

QNetwork::QNetwork(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() != 4) {
    throw DimensionError("QNetwork needs exactly two hidden layers (4 layer dims)");
  }
  for (std::size_t d : dims_) {
    if (d == 0) throw DimensionError("QNetwork layer dims must be positive");
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers(); ++l) {
    offsets_.push_back(off);
    off += dims_[l] * dims_[l + 1] + dims_[l + 1];
  }
  params_.assign(off, 0.0);
}

QNetwork QNetwork::glorot(std::vector<std::size_t> dims, Rng& rng) {
  QNetwork net(std::move(dims));
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    const std::size_t in = net.dims_[l];
    const std::size_t out = net.dims_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    const std::size_t w0 = net.weight_offset(l);
    for (std::size_t i = 0; i < in * out; ++i) {
      net.params_[w0 + i] = uniform_real(rng, -limit, limit);
    }
  }
  return net;
}

bool QNetwork::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

// Activations of every layer for one input. acts[0] is the input, acts[l+1]
// the post-activation output of layer l (ReLU for hidden, identity for head).
struct Trace {
  std::vector<std::vector<double>> acts;
};

void affine(const QNetwork& net, std::size_t layer, std::span<const double> in,
            std::vector<double>& out) {
  const auto& dims = net.layer_dims();
  const std::size_t n_in = dims[layer];
  const std::size_t n_out = dims[layer + 1];
  const auto params = net.params();
  const double* w = params.data() + net.weight_offset(layer);
  const double* b = params.data() + net.bias_offset(layer);
  out.resize(n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    const double* row = w + o * n_in;
    double acc = 0.0;
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
    out[o] = acc + b[o];
  }
}

void run_forward(const QNetwork& net, std::span<const double> state, Trace& trace) {
  if (state.size() != net.input_size()) {
    throw DimensionError("forward: state has " + std::to_string(state.size()) +
                         " features, network expects " + std::to_string(net.input_size()));
  }
  const std::size_t L = net.n_layers();
  trace.acts.resize(L + 1);
  trace.acts[0].assign(state.begin(), state.end());
  for (std::size_t l = 0; l < L; ++l) {
    affine(net, l, trace.acts[l], trace.acts[l + 1]);
    if (l + 1 < L) {
      for (double& v : trace.acts[l + 1]) v = v > 0.0 ? v : 0.0;
    }
  }
}

}  // namespace

std::vector<double> forward(const QNetwork& net, std::span<const double> state) {
  Trace trace;
  run_forward(net, state, trace);
  return std::move(trace.acts.back());
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
  if (q_values.empty()) throw DimensionError("select_action: empty q-values");
  if (uniform01(rng) < epsilon) {
    return uniform_index(rng, q_values.size());
  }
  return argmax(q_values);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity_, 4096));
}

void ReplayBuffer::push(Experience e) {
  ++pushed_;
  if (items_.size() < capacity_) {
    items_.push_back(std::move(e));
    return;
  }
  items_[head_] = std::move(e);
  head_ = (head_ + 1) % capacity_;
}

const Experience& ReplayBuffer::at(std::size_t i) const {
  return items_.at((head_ + i) % items_.size());
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size, Rng& rng) const {
  const std::size_t n = items_.size();
  if (batch_size == 0 || batch_size > n) {
    throw DimensionError("replay sample of " + std::to_string(batch_size) + " from " +
                         std::to_string(n) + " stored experiences");
  }
  // Floyd's algorithm: batch_size distinct indices in O(batch_size) draws.
  std::vector<std::size_t> chosen;
  chosen.reserve(batch_size);
  for (std::size_t j = n - batch_size; j < n; ++j) {
    const std::size_t t = uniform_index(rng, j + 1);
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  return chosen;
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  std::vector<const Experience*> out;
  for (std::size_t i : sample_indices(batch_size, rng)) out.push_back(&items_[i]);
  return out;
}

double epsilon_at(std::size_t step, const EpsilonSchedule& s) {
  if (s.decay_steps == 0 || step >= s.decay_steps) return s.end;
  const double frac = static_cast<double>(step) / static_cast<double>(s.decay_steps);
  return s.start + (s.end - s.start) * frac;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double g = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) g = rewards[t] + gamma * g;
  return g;
}

void validate(const Hyperparams& h) {
  if (!(h.gamma >= 0.0 && h.gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(h.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (h.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (h.target_sync_period < 1) throw ConfigError("target_sync_period must be at least 1");
  if (h.aggregation_period < 1) throw ConfigError("aggregation_period must be at least 1");
  if (h.hidden1 < 1 || h.hidden2 < 1) throw ConfigError("hidden layer sizes must be positive");
  if (h.replay_capacity < h.batch_size) {
    throw ConfigError("replay_capacity must be at least batch_size");
  }
  const auto& e = h.epsilon;
  if (!(e.start >= 0.0 && e.start <= 1.0 && e.end >= 0.0 && e.end <= 1.0)) {
    throw ConfigError("epsilon schedule values must lie in [0, 1]");
  }
}

std::vector<double> td_targets(std::span<const Experience* const> batch,
                               const QNetwork& target_net, double gamma) {
  std::vector<double> y;
  y.reserve(batch.size());
  for (const Experience* e : batch) {
    const std::vector<double> q_next = forward(target_net, e->next_state);
    const double best = *std::max_element(q_next.begin(), q_next.end());
    y.push_back(e->reward + gamma * best);
  }
  return y;
}

LossGradient loss_and_gradient(const QNetwork& net, std::span<const Experience* const> batch,
                               std::span<const double> targets) {
  if (batch.empty()) throw DimensionError("loss_and_gradient: empty batch");
  if (targets.size() != batch.size()) throw DimensionError("loss_and_gradient: target count");
  const auto& dims = net.layer_dims();
  const std::size_t L = net.n_layers();
  const auto params = net.params();
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  LossGradient out;
  out.gradient.assign(params.size(), 0.0);
  Trace trace;
  std::vector<double> delta;
  std::vector<double> prev_delta;

  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Experience& e = *batch[s];
    if (e.action >= net.output_size()) throw DimensionError("experience action out of range");
    run_forward(net, e.state.values(), trace);
    const double err = trace.acts[L][e.action] - targets[s];
    out.loss += err * err * inv_n;

    // Only the taken action's output carries error.
    delta.assign(dims[L], 0.0);
    delta[e.action] = 2.0 * err * inv_n;

    for (std::size_t l = L; l-- > 0;) {
      const std::size_t n_in = dims[l];
      const std::size_t n_out = dims[l + 1];
      const std::vector<double>& input = trace.acts[l];
      double* gw = out.gradient.data() + net.weight_offset(l);
      double* gb = out.gradient.data() + net.bias_offset(l);
      const double* w = params.data() + net.weight_offset(l);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* grow = gw + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) grow[i] += d * input[i];
      }
      if (l == 0) break;
      prev_delta.assign(n_in, 0.0);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = w + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) prev_delta[i] += row[i] * d;
      }
      // ReLU gate of the layer that produced `input`.
      for (std::size_t i = 0; i < n_in; ++i) {
        if (!(input[i] > 0.0)) prev_delta[i] = 0.0;
      }
      delta.swap(prev_delta);
    }
  }
  return out;
}

double train_batch(QNetwork& net, const QNetwork& target_net,
                   std::span<const Experience* const> batch, const Hyperparams& hyper) {
  if (batch.empty()) throw DimensionError("train_batch: empty batch");
  const std::vector<double> y = td_targets(batch, target_net, hyper.gamma);
  LossGradient lg = loss_and_gradient(net, batch, y);
  if (!std::isfinite(lg.loss)) {
    throw Error("train_batch: non-finite loss (" + std::to_string(lg.loss) + ")");
  }
  auto p = net.params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= hyper.alpha * lg.gradient[i];
  if (!net.all_finite()) throw Error("train_batch: parameters became non-finite");
  return lg.loss;
}

void sync_target(const QNetwork& net, QNetwork& target_net) {
  if (!net.same_architecture(target_net)) {
    throw DimensionError("sync_target: architecture mismatch");
  }
  std::copy(net.params().begin(), net.params().end(), target_net.params().begin());
}

Agent::Agent(QNetwork init, std::size_t replay_capacity, std::uint64_t seed)
    : online(init), target(std::move(init)), replay(replay_capacity), rng(seed) {}

}  // namespace specgrid
