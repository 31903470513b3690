#include <benchmark/benchmark.h>

#include "specgrid/dqn.hpp"
#include "specgrid/kernels.hpp"
#include "specgrid/presets.hpp"
#include "specgrid/rng.hpp"

using namespace specgrid;

namespace {

kernels::Exec exec_arg(const benchmark::State& state) {
  return state.range(0) == 0 ? kernels::Exec::Serial : kernels::Exec::Parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}

void BM_MeanParameters(benchmark::State& state) {
  const auto n_models = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  std::vector<QNetwork> nets;
  for (std::size_t i = 0; i < n_models; ++i) nets.push_back(QNetwork::glorot({11, 64, 64, 6}, rng));
  std::vector<std::span<const double>> views;
  for (const auto& n : nets) views.push_back(n.params());
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::mean_parameters(views, exec_arg(state)));
  }
  label(state);
}
BENCHMARK(BM_MeanParameters)->ArgsProduct({{0, 1}, {6, 15, 64}});

void BM_SinrAll(benchmark::State& state) {
  const NetworkScenario s = preset(state.range(1) == 10 ? "unseen_10" : "unseen_15");
  const auto pos = initial_positions(s);
  std::vector<Transmission> tx;
  for (std::size_t i = 0; i < s.n_pairs(); ++i) tx.push_back({2, i % 2, true});
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::sinr_all(s, pos, tx, exec_arg(state)));
  }
  label(state);
}
BENCHMARK(BM_SinrAll)->ArgsProduct({{0, 1}, {10, 15}});

// One learning step for every agent, as the training loop runs it.
void BM_AgentUpdates(benchmark::State& state) {
  const auto n_agents = static_cast<std::size_t>(state.range(1));
  Hyperparams h;
  Rng rng(2);
  const QNetwork init = QNetwork::glorot({11, h.hidden1, h.hidden2, 6}, rng);
  std::vector<Agent> agents;
  for (std::size_t i = 0; i < n_agents; ++i) {
    agents.emplace_back(init, 1000, 100 + i);
    for (int k = 0; k < 200; ++k) {
      AgentState st(8), next(8);
      for (AgentState* x : {&st, &next}) {
        for (double& v : x->distances()) v = uniform01(rng);
        x->buffer_occupancy() = 1.0;
        x->interference_caused() = uniform01(rng);
        x->interference_sensed() = uniform01(rng);
      }
      agents.back().replay.push({st, uniform_index(rng, 6), -uniform01(rng), next});
    }
  }
  for (auto _ : state) {
    kernels::for_each_index(
        n_agents,
        [&](std::size_t i) {
          Agent& a = agents[i];
          const auto batch = a.replay.sample(h.batch_size, a.rng);
          benchmark::DoNotOptimize(train_batch(a.online, a.target, batch, h));
        },
        exec_arg(state));
  }
  label(state);
}
BENCHMARK(BM_AgentUpdates)->ArgsProduct({{0, 1}, {6, 15}});

}  // namespace

BENCHMARK_MAIN();
