#include "specgrid/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "specgrid/aggregation.hpp"
#include "specgrid/error.hpp"
#include "specgrid/kernels.hpp"
#include "specgrid/scenario_io.hpp"

namespace specgrid {

using nlohmann::json;

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kEnvStream = 2;
constexpr std::uint64_t kAgentStream = 1000;
constexpr std::uint64_t kSegmentStream = 1u << 20;
constexpr std::uint64_t kEvalStream = 3;

kernels::Exec exec_of(const TrainConfig& c) {
  return c.parallel ? kernels::Exec::Parallel : kernels::Exec::Serial;
}

std::uint64_t env_seed(std::uint64_t seed, const NetworkScenario& s) {
  return derive_seed(derive_seed(seed, kEnvStream), s.seed);
}

}  // namespace

void validate(const TrainConfig& c) {
  validate(c.hyper);
  if (c.env.k < 1) throw ConfigError("k must be at least 1");
  if (c.env.buffer_capacity < 1) throw ConfigError("buffer_capacity must be at least 1");
  if (!(c.env.max_distance > 0.0)) throw ConfigError("max_distance must be positive");
  for (std::size_t v : {c.total_steps, c.individual_steps, c.finetune_steps_per_network,
                        c.finetune_loops, c.eval_steps, c.success_window}) {
    if (v < 1) throw ConfigError("step counts must be at least 1");
  }
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (!(c.epsilon_restart >= 0.0 && c.epsilon_restart <= 1.0)) {
    throw ConfigError("epsilon_restart must lie in [0, 1]");
  }
}

json train_config_to_json(const TrainConfig& c) {
  const auto& h = c.hyper;
  const auto& e = c.env;
  return json{{"schema_version", 1},
              {"hyper",
               {{"gamma", h.gamma},
                {"alpha", h.alpha},
                {"batch_size", h.batch_size},
                {"target_sync_period", h.target_sync_period},
                {"epsilon_start", h.epsilon.start},
                {"epsilon_end", h.epsilon.end},
                {"epsilon_decay_steps", h.epsilon.decay_steps},
                {"aggregation_period", h.aggregation_period},
                {"hidden1", h.hidden1},
                {"hidden2", h.hidden2},
                {"replay_capacity", h.replay_capacity}}},
              {"env",
               {{"k", e.k},
                {"max_distance", e.max_distance},
                {"c1_per_power", e.rewards.c1_per_power},
                {"c2_assigned", e.rewards.c2_assigned},
                {"c2_other", e.rewards.c2_other},
                {"c3_failure", e.rewards.c3_failure},
                {"buffer_capacity", e.buffer_capacity},
                {"arrivals_per_slot", e.arrivals_per_slot},
                {"initial_occupancy", e.initial_occupancy}}},
              {"total_steps", c.total_steps},
              {"aggregation", c.aggregation},
              {"individual_steps", c.individual_steps},
              {"finetune_steps_per_network", c.finetune_steps_per_network},
              {"finetune_loops", c.finetune_loops},
              {"eval_steps", c.eval_steps},
              {"seeds", c.seeds},
              {"epsilon_restart", c.epsilon_restart},
              {"success_window", c.success_window},
              {"parallel", c.parallel}};
}

TrainConfig train_config_from_json(const json& doc) {
  using namespace json_strict;
  const std::string where = "config";
  require_object(doc, where);
  reject_unknown(doc,
                 {"schema_version", "hyper", "env", "total_steps", "aggregation",
                  "individual_steps", "finetune_steps_per_network", "finetune_loops",
                  "eval_steps", "seeds", "epsilon_restart", "success_window", "parallel"},
                 where);
  if (doc.contains("schema_version")) require_schema_version(doc, 1, where);
  TrainConfig c;
  if (auto it = doc.find("hyper"); it != doc.end()) {
    const std::string w = where + ".hyper";
    require_object(*it, w);
    reject_unknown(*it,
                   {"gamma", "alpha", "batch_size", "target_sync_period", "epsilon_start",
                    "epsilon_end", "epsilon_decay_steps", "aggregation_period", "hidden1",
                    "hidden2", "replay_capacity"},
                   w);
    auto& h = c.hyper;
    read_optional(*it, "gamma", h.gamma, w);
    read_optional(*it, "alpha", h.alpha, w);
    read_optional(*it, "batch_size", h.batch_size, w);
    read_optional(*it, "target_sync_period", h.target_sync_period, w);
    read_optional(*it, "epsilon_start", h.epsilon.start, w);
    read_optional(*it, "epsilon_end", h.epsilon.end, w);
    read_optional(*it, "epsilon_decay_steps", h.epsilon.decay_steps, w);
    read_optional(*it, "aggregation_period", h.aggregation_period, w);
    read_optional(*it, "hidden1", h.hidden1, w);
    read_optional(*it, "hidden2", h.hidden2, w);
    read_optional(*it, "replay_capacity", h.replay_capacity, w);
  }
  if (auto it = doc.find("env"); it != doc.end()) {
    const std::string w = where + ".env";
    require_object(*it, w);
    reject_unknown(*it,
                   {"k", "max_distance", "c1_per_power", "c2_assigned", "c2_other", "c3_failure",
                    "buffer_capacity", "arrivals_per_slot", "initial_occupancy"},
                   w);
    auto& e = c.env;
    read_optional(*it, "k", e.k, w);
    read_optional(*it, "max_distance", e.max_distance, w);
    read_optional(*it, "c1_per_power", e.rewards.c1_per_power, w);
    read_optional(*it, "c2_assigned", e.rewards.c2_assigned, w);
    read_optional(*it, "c2_other", e.rewards.c2_other, w);
    read_optional(*it, "c3_failure", e.rewards.c3_failure, w);
    read_optional(*it, "buffer_capacity", e.buffer_capacity, w);
    read_optional(*it, "arrivals_per_slot", e.arrivals_per_slot, w);
    read_optional(*it, "initial_occupancy", e.initial_occupancy, w);
  }
  read_optional(doc, "total_steps", c.total_steps, where);
  read_optional(doc, "aggregation", c.aggregation, where);
  read_optional(doc, "individual_steps", c.individual_steps, where);
  read_optional(doc, "finetune_steps_per_network", c.finetune_steps_per_network, where);
  read_optional(doc, "finetune_loops", c.finetune_loops, where);
  read_optional(doc, "eval_steps", c.eval_steps, where);
  read_optional(doc, "seeds", c.seeds, where);
  read_optional(doc, "epsilon_restart", c.epsilon_restart, where);
  read_optional(doc, "success_window", c.success_window, where);
  read_optional(doc, "parallel", c.parallel, where);
  validate(c);
  return c;
}

std::vector<std::size_t> network_dims(const TrainConfig& c, std::size_t n_actions) {
  return {c.env.k + 3, c.hyper.hidden1, c.hyper.hidden2, n_actions};
}

Architecture architecture_for(const TrainConfig& c, const NetworkScenario& s) {
  return {network_dims(c, s.n_p() * s.n_f), c.env.k, s.n_p(), s.n_f};
}

QNetwork fresh_model(const TrainConfig& c, const NetworkScenario& s, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kInitStream));
  return QNetwork::glorot(network_dims(c, s.n_p() * s.n_f), rng);
}

TrainResult run_training(const NetworkScenario& scenario, const TrainConfig& config,
                         const RunSpec& spec) {
  validate(config);
  Environment env(scenario, config.env, env_seed(spec.seed, scenario));
  const std::size_t n = env.n_pairs();
  const std::size_t n_p = scenario.n_p();
  const std::size_t n_f = scenario.n_f;
  const kernels::Exec exec = exec_of(config);
  const Hyperparams& hyper = config.hyper;

  QNetwork init = spec.init != nullptr ? *spec.init : fresh_model(config, scenario, spec.seed);
  if (init.layer_dims() != network_dims(config, n_p * n_f)) {
    throw DimensionError("initial model does not match the scenario's state/action sizes");
  }
  std::vector<Agent> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    agents.emplace_back(init, hyper.replay_capacity, derive_seed(spec.seed, kAgentStream + i));
  }

  TrainResult result;
  RunMetrics& m = result.metrics;
  m.n_agents = n;
  m.n_p = n_p;
  m.n_f = n_f;
  m.records.reserve(spec.steps * n);
  m.step_loss.reserve(spec.steps);

  std::vector<AgentState> states = env.states();
  std::vector<RadioAction> actions(n);
  std::vector<double> losses(n);
  std::vector<char> learned(n);

  for (std::size_t t = 0; t < spec.steps; ++t) {
    const double eps = epsilon_at(t, spec.epsilon);
    kernels::for_each_index(
        n,
        [&](std::size_t i) {
          const auto q = forward(agents[i].online, states[i]);
          actions[i] = RadioAction::from_flat(select_action(q, eps, agents[i].rng), n_p, n_f);
        },
        exec);

    EnvStepResult step = env.step(actions);

    for (std::size_t i = 0; i < n; ++i) {
      const PairOutcome& o = step.pairs[i];
      m.records.push_back({t, static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(actions[i].power_index),
                           static_cast<std::uint32_t>(actions[i].frequency_index), o.reward,
                           o.success, o.sinr_db});
    }

    kernels::for_each_index(
        n,
        [&](std::size_t i) {
          Agent& a = agents[i];
          a.replay.push({states[i], actions[i].flat_index, step.pairs[i].reward,
                         step.pairs[i].next_state});
          learned[i] = 0;
          if (a.replay.size() >= hyper.batch_size) {
            const auto batch = a.replay.sample(hyper.batch_size, a.rng);
            losses[i] = train_batch(a.online, a.target, batch, hyper);
            learned[i] = 1;
            ++a.learn_steps;
          }
        },
        exec);

    double loss_sum = 0.0;
    std::size_t loss_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!learned[i]) continue;
      if (!(losses[i] >= 0.0) || !std::isfinite(losses[i])) {
        throw Error("training produced an invalid loss at step " + std::to_string(t));
      }
      loss_sum += losses[i];
      ++loss_n;
    }
    if (loss_n > 0) m.step_loss.push_back(loss_sum / static_cast<double>(loss_n));

    const std::size_t done = t + 1;
    if (done % hyper.target_sync_period == 0) {
      for (Agent& a : agents) sync_target(a.online, a.target);
    }
    if (spec.aggregation && done % hyper.aggregation_period == 0) {
      const QNetwork mean = average_agents(agents, exec);
      broadcast(mean, agents);
      ++m.aggregation_barriers;
      if (spec.hooks.on_barrier) spec.hooks.on_barrier(done, agents);
    }

    for (std::size_t i = 0; i < n; ++i) states[i] = std::move(step.pairs[i].next_state);
  }

  result.models.reserve(n);
  for (Agent& a : agents) result.models.push_back(std::move(a.online));
  return result;
}

TrainResult train_network(const NetworkScenario& scenario, const TrainConfig& config,
                          std::uint64_t seed, const QNetwork* init, TrainHooks hooks) {
  RunSpec spec;
  spec.steps = config.total_steps;
  spec.aggregation = config.aggregation;
  spec.epsilon = config.hyper.epsilon;
  spec.seed = seed;
  spec.init = init;
  spec.hooks = std::move(hooks);
  return run_training(scenario, config, spec);
}

TrainResult train_independent(const NetworkScenario& scenario, const TrainConfig& config,
                              std::uint64_t seed, TrainHooks hooks) {
  RunSpec spec;
  spec.steps = config.total_steps;
  spec.aggregation = false;
  spec.epsilon = config.hyper.epsilon;
  spec.seed = seed;
  spec.hooks = std::move(hooks);
  return run_training(scenario, config, spec);
}

RunMetrics evaluate(const QNetwork& model, const NetworkScenario& scenario,
                    const TrainConfig& config, std::size_t eval_steps, std::uint64_t seed) {
  validate(config);
  if (model.layer_dims() != network_dims(config, scenario.n_p() * scenario.n_f)) {
    throw CheckpointError(CheckpointErrorKind::ArchitectureMismatch,
                          "model does not match scenario '" + scenario.name + "'");
  }
  const std::uint64_t eval_seed = derive_seed(seed, kEvalStream);
  Environment env(scenario, config.env, env_seed(eval_seed, scenario));
  const std::size_t n = env.n_pairs();
  RunMetrics m;
  m.n_agents = n;
  m.n_p = scenario.n_p();
  m.n_f = scenario.n_f;
  m.records.reserve(eval_steps * n);

  std::vector<AgentState> states = env.states();
  std::vector<RadioAction> actions(n);
  for (std::size_t t = 0; t < eval_steps; ++t) {
    kernels::for_each_index(
        n,
        [&](std::size_t i) {
          const auto q = forward(model, states[i]);
          actions[i] = RadioAction::from_flat(argmax(q), m.n_p, m.n_f);
        },
        exec_of(config));
    EnvStepResult step = env.step(actions);
    for (std::size_t i = 0; i < n; ++i) {
      const PairOutcome& o = step.pairs[i];
      m.records.push_back({t, static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(actions[i].power_index),
                           static_cast<std::uint32_t>(actions[i].frequency_index), o.reward,
                           o.success, o.sinr_db});
      states[i] = std::move(step.pairs[i].next_state);
    }
  }
  return m;
}

namespace {

std::string p1_name(const std::string& prefix, std::size_t s) {
  return prefix + "_p1_s" + std::to_string(s);
}
std::string p2_name(const std::string& prefix) { return prefix + "_p2_aggregate"; }
std::string p3_name(const std::string& prefix, std::size_t loop, std::size_t s) {
  return prefix + "_p3_l" + std::to_string(loop) + "_s" + std::to_string(s);
}

// Segment cursor: [0, S) individual training, S the aggregation step,
// S + 1 + loop * S + s the fine-tune segments.
json resume_block(std::uint64_t seed, std::size_t next_cursor, std::size_t n_scenarios) {
  return json{{"seed", seed},
              {"next_cursor", next_cursor},
              {"n_scenarios", n_scenarios},
              {"next_segment_seed", derive_seed(seed, kSegmentStream + next_cursor)}};
}

ModelCheckpoint make_checkpoint(const QNetwork& net, const TrainConfig& config,
                                const NetworkScenario& scenario, std::uint64_t step,
                                json resume) {
  CheckpointMeta meta;
  meta.scenario = scenario.name;
  meta.training_step = step;
  meta.created = utc_timestamp();
  meta.extra = json{{"resume", std::move(resume)}};
  return ModelCheckpoint::from_network(net, config.env.k, scenario.n_p(), scenario.n_f,
                                       std::move(meta));
}

}  // namespace

GeneralizedResult generalized_train(std::span<const NetworkScenario> scenarios,
                                    const TrainConfig& config, std::uint64_t seed,
                                    CheckpointStore& store, const GeneralizedOptions& options) {
  validate(config);
  if (scenarios.empty()) throw ConfigError("generalized training needs at least one scenario");
  const std::size_t S = scenarios.size();
  const Architecture arch = architecture_for(config, scenarios.front());
  for (const auto& s : scenarios) {
    require_architecture(architecture_for(config, s), arch, "scenario '" + s.name + "'");
  }
  const kernels::Exec exec = exec_of(config);
  const std::size_t last_cursor = S + S * config.finetune_loops;

  GeneralizedResult result;
  std::size_t cursor = 0;
  std::uint64_t steps_done = 0;
  QNetwork shared = fresh_model(config, scenarios.front(), seed);

  if (options.resume_from) {
    const ModelCheckpoint c = store.load(*options.resume_from);
    require_architecture(c.arch, arch, "resume checkpoint");
    const json& r = c.meta.extra.at("resume");
    if (r.at("seed").get<std::uint64_t>() != seed || r.at("n_scenarios").get<std::size_t>() != S) {
      throw ConfigError("resume checkpoint was written by a different run");
    }
    cursor = r.at("next_cursor").get<std::size_t>();
    steps_done = c.meta.training_step;
    if (cursor > S) shared = c.to_network();
  }

  auto segment_spec = [&](std::size_t cur, std::size_t steps, EpsilonSchedule eps) {
    RunSpec spec;
    spec.steps = steps;
    spec.aggregation = config.aggregation;
    spec.epsilon = eps;
    spec.seed = derive_seed(seed, kSegmentStream + cur);
    return spec;
  };

  // Phase 1: every scenario trained from the same fresh initialization.
  const QNetwork initial = fresh_model(config, scenarios.front(), seed);
  for (; cursor < S; ++cursor) {
    RunSpec spec = segment_spec(cursor, config.individual_steps, config.hyper.epsilon);
    spec.init = &initial;
    TrainResult tr = run_training(scenarios[cursor], config, spec);
    const QNetwork model = average_models(std::span<const QNetwork>(tr.models), exec);
    steps_done += config.individual_steps;
    const std::string name = p1_name(options.prefix, cursor);
    store.save(name, make_checkpoint(model, config, scenarios[cursor], steps_done,
                                     resume_block(seed, cursor + 1, S)));
    result.segments.push_back({Phase::Individual, 0, cursor, scenarios[cursor].name, name,
                               std::move(tr.metrics)});
  }

  // Phase 2: average the per-network checkpoints.
  if (cursor == S) {
    std::vector<std::string> names;
    for (std::size_t s = 0; s < S; ++s) names.push_back(p1_name(options.prefix, s));
    shared = aggregate_checkpoints(store, names, exec);
    const std::string name = p2_name(options.prefix);
    store.save(name, make_checkpoint(shared, config, scenarios.front(), steps_done,
                                     resume_block(seed, S + 1, S)));
    result.segments.push_back({Phase::Aggregate, 0, 0, "", name, RunMetrics{}});
    ++cursor;
  }

  // Phase 3: round-robin fine-tuning, carrying the averaged model forward.
  // Exploration restarts at each segment and anneals within it.
  const EpsilonSchedule restart{config.epsilon_restart, config.hyper.epsilon.end,
                                config.finetune_steps_per_network};
  for (; cursor <= last_cursor; ++cursor) {
    const std::size_t idx = cursor - S - 1;
    const std::size_t loop = idx / S;
    const std::size_t s = idx % S;
    RunSpec spec = segment_spec(cursor, config.finetune_steps_per_network, restart);
    spec.init = &shared;
    TrainResult tr = run_training(scenarios[s], config, spec);
    // Closing barrier at the end of each network configuration.
    shared = average_models(std::span<const QNetwork>(tr.models), exec);
    steps_done += config.finetune_steps_per_network;
    const std::string name = p3_name(options.prefix, loop, s);
    store.save(name, make_checkpoint(shared, config, scenarios[s], steps_done,
                                     resume_block(seed, cursor + 1, S)));
    result.segments.push_back({Phase::FineTune, loop, s, scenarios[s].name, name,
                               std::move(tr.metrics)});
  }

  result.model = std::move(shared);
  return result;
}

std::uint64_t parameter_hash(const QNetwork& net) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (double v : net.params()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace specgrid
