#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "specgrid/aggregation.hpp"
#include "specgrid/error.hpp"
#include "specgrid/presets.hpp"
#include "specgrid/training.hpp"

using namespace specgrid;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.hyper.hidden1 = 12;
  c.hyper.hidden2 = 12;
  c.hyper.batch_size = 8;
  c.hyper.replay_capacity = 400;
  c.hyper.epsilon.decay_steps = 100;
  c.hyper.target_sync_period = 20;
  c.total_steps = 200;
  c.individual_steps = 60;
  c.finetune_steps_per_network = 50;
  c.finetune_loops = 2;
  c.eval_steps = 50;
  return c;
}

bool same_params(const QNetwork& a, const QNetwork& b) {
  return a.layer_dims() == b.layer_dims() &&
         std::equal(a.params().begin(), a.params().end(), b.params().begin(),
                    [](double x, double y) {
                      return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
                    });
}

std::vector<NetworkScenario> gen_presets(std::size_t n) {
  std::vector<NetworkScenario> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(preset("gen_train_" + std::to_string(i)));
  return out;
}

}  // namespace

TEST_CASE("aggregation barriers fire every period") {
  const TrainConfig c = small_config();
  std::vector<std::size_t> at;
  TrainHooks hooks;
  hooks.on_barrier = [&](std::size_t step, std::span<const Agent> agents) {
    at.push_back(step);
    for (const Agent& a : agents) {
      CHECK(same_params(a.online, agents.front().online));
      CHECK(same_params(a.target, agents.front().online));
    }
  };
  const TrainResult r = train_network(preset("six_pair"), c, 3, nullptr, hooks);
  CHECK(r.metrics.aggregation_barriers == 4);
  CHECK(at == std::vector<std::size_t>{50, 100, 150, 200});
  for (const auto& m : r.models) CHECK(same_params(m, r.models.front()));
}

TEST_CASE("barrier count follows the period") {
  TrainConfig c = small_config();
  c.total_steps = 130;
  c.hyper.aggregation_period = 25;
  CHECK(train_network(preset("gen_train_1"), c, 1).metrics.aggregation_barriers == 5);
}

TEST_CASE("independent agents diverge and never meet") {
  const TrainConfig c = small_config();
  std::size_t calls = 0;
  TrainHooks hooks;
  hooks.on_barrier = [&](std::size_t, std::span<const Agent>) { ++calls; };
  const TrainResult r = train_independent(preset("six_pair"), c, 3, hooks);
  CHECK(calls == 0);
  CHECK(r.metrics.aggregation_barriers == 0);
  bool differ = false;
  for (const auto& m : r.models) differ = differ || !same_params(m, r.models.front());
  CHECK(differ);
}

TEST_CASE("training is deterministic per seed") {
  const TrainConfig c = small_config();
  const NetworkScenario s = preset("six_pair");
  for (bool agg : {true, false}) {
    const TrainResult a = agg ? train_network(s, c, 9) : train_independent(s, c, 9);
    const TrainResult b = agg ? train_network(s, c, 9) : train_independent(s, c, 9);
    CHECK(a.metrics.records == b.metrics.records);
    CHECK(a.metrics.step_loss == b.metrics.step_loss);
    for (std::size_t i = 0; i < a.models.size(); ++i) CHECK(same_params(a.models[i], b.models[i]));
  }
  const TrainResult other = train_network(s, c, 10);
  CHECK(other.metrics.records != train_network(s, c, 9).metrics.records);
}

TEST_CASE("parallel training matches serial") {
  TrainConfig c = small_config();
  const NetworkScenario s = preset("six_pair");
  const TrainResult a = train_network(s, c, 4);
  c.parallel = true;
  const TrainResult b = train_network(s, c, 4);
  CHECK(a.metrics.records == b.metrics.records);
  for (std::size_t i = 0; i < a.models.size(); ++i) CHECK(same_params(a.models[i], b.models[i]));
}

TEST_CASE("one metric row per pair per step") {
  const TrainConfig c = small_config();
  for (const auto& name : {"six_pair", "gen_train_5"}) {
    const NetworkScenario s = preset(name);
    const TrainResult r = train_network(s, c, 2);
    CHECK(r.metrics.records.size() == c.total_steps * s.pairs.size());
    CHECK(r.metrics.n_steps() == c.total_steps);
    CHECK(r.models.size() == s.pairs.size());
    for (double l : r.metrics.step_loss) {
      CHECK(l >= 0.0);
      CHECK(std::isfinite(l));
    }
    const RunMetrics e = evaluate(r.models.front(), s, c, 70, 2);
    CHECK(e.records.size() == 70 * s.pairs.size());
  }
}

TEST_CASE("evaluation leaves the model untouched and is reproducible") {
  const TrainConfig c = small_config();
  const NetworkScenario s = preset("unseen_10");
  const QNetwork model = fresh_model(c, s, 5);
  const std::uint64_t before = parameter_hash(model);
  const RunMetrics a = evaluate(model, s, c, 100, 7);
  CHECK(parameter_hash(model) == before);
  CHECK(a.records == evaluate(model, s, c, 100, 7).records);
  CHECK(a.aggregation_barriers == 0);

  NetworkScenario still = s;
  still.mobility.enabled = false;
  const RunMetrics b1 = evaluate(model, still, c, 100, 1);
  const RunMetrics b2 = evaluate(model, still, c, 100, 2);
  CHECK(b1.records == b2.records);
}

TEST_CASE("evaluation rejects a model of another shape") {
  const TrainConfig c = small_config();
  TrainConfig wide = c;
  wide.hyper.hidden1 = 20;
  const QNetwork model = fresh_model(wide, preset("six_pair"), 1);
  try {
    evaluate(model, preset("six_pair"), c, 10, 1);
    FAIL("expected a mismatch");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointErrorKind::ArchitectureMismatch);
  }
  CHECK_THROWS_AS(train_network(preset("six_pair"), c, 1, &model), DimensionError);
}

TEST_CASE("generalized protocol step accounting") {
  const TrainConfig c = small_config();
  const auto scenarios = gen_presets(3);
  testing::TempDir dir("gen_steps");
  CheckpointStore store(dir.path());
  const GeneralizedResult g = generalized_train(scenarios, c, 1, store);
  REQUIRE(g.segments.size() == 3 + 1 + 2 * 3);
  std::size_t p1 = 0, p3 = 0;
  for (const auto& seg : g.segments) {
    CHECK(store.contains(seg.checkpoint));
    if (seg.phase == Phase::Individual) p1 += seg.metrics.n_steps();
    if (seg.phase == Phase::FineTune) p3 += seg.metrics.n_steps();
    if (seg.phase == Phase::Aggregate) CHECK(seg.metrics.records.empty());
  }
  CHECK(p1 == 3 * c.individual_steps);
  CHECK(p3 == c.finetune_loops * 3 * c.finetune_steps_per_network);
  CHECK(store.load(g.segments.back().checkpoint).meta.training_step ==
        3 * c.individual_steps + c.finetune_loops * 3 * c.finetune_steps_per_network);
  CHECK(same_params(store.load(g.segments.back().checkpoint).to_network(), g.model));

  // The aggregate checkpoint is the mean of the phase-one checkpoints.
  std::vector<QNetwork> p1_models;
  for (std::size_t s = 0; s < 3; ++s) p1_models.push_back(store.load(g.segments[s].checkpoint).to_network());
  CHECK(same_params(store.load(g.segments[3].checkpoint).to_network(),
                    average_models(std::span<const QNetwork>(p1_models))));

  // Fine-tune segments visit the scenarios in order, loop after loop.
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(g.segments[4 + k].loop == k / 3);
    CHECK(g.segments[4 + k].scenario_index == k % 3);
  }
}

TEST_CASE("default protocol runs thirty thousand fine-tune steps") {
  const TrainConfig c;
  CHECK(c.individual_steps == 8000);
  CHECK(c.finetune_loops * 5 * c.finetune_steps_per_network == 30000);
}

TEST_CASE("generalized protocol with one scenario") {
  const TrainConfig c = small_config();
  const auto scenarios = gen_presets(1);
  testing::TempDir dir("gen_one");
  CheckpointStore store(dir.path());
  const GeneralizedResult g = generalized_train(scenarios, c, 2, store);
  REQUIRE(g.segments.size() == 1 + 1 + 2);
  // Averaging a single checkpoint returns it unchanged.
  CHECK(same_params(store.load(g.segments[0].checkpoint).to_network(),
                    store.load(g.segments[1].checkpoint).to_network()));
  for (std::size_t k = 2; k < 4; ++k) CHECK(g.segments[k].scenario_index == 0);
  CHECK_THROWS_AS(generalized_train(std::span<const NetworkScenario>{}, c, 2, store), ConfigError);
}

TEST_CASE("resuming from any phase boundary reproduces the uninterrupted run") {
  const TrainConfig c = small_config();
  const auto scenarios = gen_presets(2);
  testing::TempDir full_dir("resume_full");
  CheckpointStore full(full_dir.path());
  const GeneralizedResult g = generalized_train(scenarios, c, 11, full);

  for (std::size_t cut = 0; cut + 1 < g.segments.size(); ++cut) {
    testing::TempDir dir("resume_part");
    CheckpointStore part(dir.path());
    for (std::size_t k = 0; k <= cut; ++k) {
      const std::string& name = g.segments[k].checkpoint;
      std::filesystem::copy_file(full.path_for(name), part.path_for(name));
    }
    GeneralizedOptions opt;
    opt.resume_from = g.segments[cut].checkpoint;
    const GeneralizedResult r = generalized_train(scenarios, c, 11, part, opt);
    REQUIRE(r.segments.size() == g.segments.size() - cut - 1);
    for (std::size_t k = 0; k < r.segments.size(); ++k) {
      const Segment& a = g.segments[cut + 1 + k];
      const Segment& b = r.segments[k];
      CHECK(a.checkpoint == b.checkpoint);
      CHECK(a.metrics.records == b.metrics.records);
      CHECK(same_params(full.load(a.checkpoint).to_network(), part.load(b.checkpoint).to_network()));
    }
    CHECK(same_params(r.model, g.model));
  }

  GeneralizedOptions wrong;
  wrong.resume_from = g.segments[1].checkpoint;
  CHECK_THROWS_AS(generalized_train(scenarios, c, 12, full, wrong), ConfigError);
}

TEST_CASE("config json round trip and strictness") {
  TrainConfig c = small_config();
  c.seeds = {4, 5, 6};
  c.env.max_distance = 35.0;
  c.parallel = true;
  const TrainConfig back = train_config_from_json(train_config_to_json(c));
  CHECK(train_config_to_json(back) == train_config_to_json(c));

  auto doc = train_config_to_json(c);
  doc["hyper"]["learning_rate_typo"] = 0.1;
  CHECK_THROWS_AS(train_config_from_json(doc), ConfigError);
  doc = train_config_to_json(c);
  doc["surprise"] = 1;
  CHECK_THROWS_AS(train_config_from_json(doc), ConfigError);
  doc = train_config_to_json(c);
  doc["env"]["extra"] = 1;
  CHECK_THROWS_AS(train_config_from_json(doc), ConfigError);

  CHECK(train_config_to_json(train_config_from_json(nlohmann::json::object())) ==
        train_config_to_json(TrainConfig{}));

  for (const char* key : {"total_steps", "individual_steps", "finetune_steps_per_network",
                          "finetune_loops", "eval_steps"}) {
    doc = train_config_to_json(c);
    doc[key] = 0;
    CHECK_THROWS_AS(train_config_from_json(doc), ConfigError);
  }
  doc = train_config_to_json(c);
  doc["seeds"] = nlohmann::json::array();
  CHECK_THROWS_AS(train_config_from_json(doc), ConfigError);
  doc = train_config_to_json(c);
  doc["total_steps"] = "many";
  CHECK_THROWS_AS(train_config_from_json(doc), ConfigError);
}
