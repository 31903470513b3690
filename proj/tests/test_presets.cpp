#include <doctest.h>

#include <set>

#include "specgrid/error.hpp"
#include "specgrid/mdp.hpp"
#include "specgrid/presets.hpp"
#include "specgrid/scenario_io.hpp"

using namespace specgrid;

TEST_CASE("six pair preset") {
  const NetworkScenario s = preset("six_pair");
  CHECK(s.pairs.size() == 6);
  CHECK(s.n_p() == 3);
  CHECK(s.n_f == 2);
  CHECK(s.power_levels_dbm == std::vector<double>{1.0, 10.0, 20.0});
}

TEST_CASE("unseen presets") {
  CHECK(preset("unseen_10").pairs.size() == 10);
  CHECK(preset("unseen_15").pairs.size() == 15);
}

TEST_CASE("generalization training presets") {
  for (int i = 1; i <= 5; ++i) {
    const NetworkScenario s = preset("gen_train_" + std::to_string(i));
    CHECK(s.pairs.size() >= 4);
    CHECK(s.pairs.size() <= 8);
    CHECK(s.n_p() == 3);
    CHECK(s.n_f == 2);
  }
}

TEST_CASE("every preset validates and shares one action space") {
  std::set<std::string> names;
  for (const auto& s : preset_scenarios()) {
    CHECK_NOTHROW(validate(s));
    CHECK(names.insert(s.name).second);
    CHECK(s.n_p() * s.n_f == 6);
    for (const auto& p : s.pairs) {
      CHECK(p.assigned_frequency < s.n_f);
      CHECK(p.tx_pos.x >= 0.0);
      CHECK(p.tx_pos.x <= s.area_w);
      CHECK(p.rx_pos.y >= 0.0);
      CHECK(p.rx_pos.y <= s.area_h);
    }
  }
  CHECK(preset_names().size() == 8);
}

TEST_CASE("presets are reproducible") {
  CHECK(scenario_to_json(preset("unseen_15")) == scenario_to_json(preset("unseen_15")));
}

TEST_CASE("unknown preset") {
  CHECK_THROWS_AS(preset("nine_pair"), ConfigError);
  try {
    preset("nine_pair");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("six_pair") != std::string::npos);
  }
}

TEST_CASE("paired links in a preset interfere only on a shared channel") {
  const NetworkScenario s = preset("six_pair");
  EnvConfig cfg;
  Environment env(s, cfg, 1);
  std::vector<RadioAction> shared(6, RadioAction::from_parts(2, 0, 3, 2));
  const auto a = env.step(shared);
  std::size_t ok_shared = 0;
  for (const auto& p : a.pairs) ok_shared += p.success;
  CHECK(ok_shared == 3);

  Environment env2(s, cfg, 1);
  std::vector<RadioAction> split;
  for (std::size_t i = 0; i < 6; ++i) split.push_back(RadioAction::from_parts(2, i % 2, 3, 2));
  const auto b = env2.step(split);
  for (const auto& p : b.pairs) CHECK(p.success);
}

TEST_CASE("every preset is collision free on its assigned channels") {
  for (const auto& s : preset_scenarios()) {
    Environment env(s, EnvConfig{}, 1);
    std::vector<RadioAction> assigned;
    for (const auto& p : s.pairs) {
      assigned.push_back(RadioAction::from_parts(2, p.assigned_frequency, 3, 2));
    }
    for (const auto& p : env.step(assigned).pairs) CHECK(p.success);
  }
}
