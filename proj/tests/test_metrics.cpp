#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "specgrid/metrics.hpp"

using namespace specgrid;

namespace {

RunMetrics from_success(const std::vector<std::vector<int>>& per_step) {
  RunMetrics m;
  m.n_agents = per_step.front().size();
  m.n_p = 3;
  m.n_f = 2;
  for (std::size_t t = 0; t < per_step.size(); ++t) {
    for (std::size_t a = 0; a < per_step[t].size(); ++a) {
      m.records.push_back({t, static_cast<std::uint32_t>(a), 0, static_cast<std::uint32_t>(a % 2),
                           -0.1, per_step[t][a] != 0, 10.0});
    }
  }
  return m;
}

const char* kTenRows =
    "step,agent,power_index,freq_index,reward,success,sinr_db\n"
    "0,0,0,0,-0.1,1,30\n"
    "0,1,2,1,-10,0,5\n"
    "1,0,0,0,-0.1,1,30\n"
    "1,1,1,0,-7,1,25\n"
    "2,0,1,1,-10,0,3\n"
    "2,1,1,0,-7,1,25\n"
    "3,0,0,1,-2.05,1,28\n"
    "3,1,0,0,-0.1,1,30\n"
    "4,0,0,1,-2.05,1,28\n"
    "4,1,2,0,-10,0,2\n";

}  // namespace

TEST_CASE("network success and windows") {
  const RunMetrics m = from_success({{1, 0}, {1, 1}, {0, 0}, {1, 1}});
  CHECK(network_success(m.records, 2) == std::vector<double>{0.5, 1.0, 0.0, 1.0});
  const std::vector<double> series{0.5, 1.0, 0.0, 1.0};
  CHECK(windowed(series, 2) == std::vector<double>{0.75, 0.5, 0.5});
  CHECK(windowed(series, 5).empty());
  CHECK(final_windowed_success(m, 2).value() == 0.5);
  CHECK_FALSE(final_windowed_success(m, 5).has_value());
  CHECK(steps_to_reach(m, 2, 0.75).value() == 1);
  CHECK_FALSE(steps_to_reach(m, 2, 0.9).has_value());
  CHECK(success_rate(m, 0, 4) == 0.625);
  CHECK(success_rate(m, 3, 4) == 1.0);
  CHECK(frequency_fractions(m, 0) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("windowed success stays in the unit interval") {
  Rng rng(1);
  std::vector<std::vector<int>> steps(500, std::vector<int>(6));
  for (auto& s : steps) {
    for (int& v : s) v = uniform01(rng) < 0.7;
  }
  const RunMetrics m = from_success(steps);
  for (double w : windowed(network_success(m.records, 6), 100)) {
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("csv header is fixed") {
  CHECK(std::string(kMetricsCsvHeader) == "step,agent,power_index,freq_index,reward,success,sinr_db");
  CHECK(metrics_csv_text({}) == std::string(kMetricsCsvHeader) + "\n");
}

TEST_CASE("csv round trip preserves every double") {
  Rng rng(2);
  std::vector<StepRecord> rows;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    rows.push_back({t / 4, static_cast<std::uint32_t>(t % 4),
                    static_cast<std::uint32_t>(uniform_index(rng, 3)),
                    static_cast<std::uint32_t>(uniform_index(rng, 2)),
                    uniform_real(rng, -12, 0) * std::pow(10.0, uniform_real(rng, -10, 3)),
                    uniform01(rng) < 0.5, uniform_real(rng, -30, 80)});
  }
  const std::string text = metrics_csv_text(rows);
  CHECK(parse_metrics_csv(text) == rows);
  CHECK(text.find('\r') == std::string::npos);

  testing::TempDir dir("metrics_csv");
  write_metrics_csv(dir / "m.csv", rows);
  CHECK(testing::slurp(dir / "m.csv") == text);
  CHECK(read_metrics_csv(dir / "m.csv") == rows);
}

TEST_CASE("malformed csv reports the line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_metrics_csv(text);
    } catch (const CsvError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string h = std::string(kMetricsCsvHeader) + "\n";
  CHECK(line_of("step,agent\n") == 1);
  CHECK(line_of("") == 1);
  CHECK(line_of(h + "0,0,0,0,-0.1,1,30\n0,1,0,0,-0.1,1\n") == 3);
  CHECK(line_of(h + "0,0,0,0,abc,1,30\n") == 2);
  CHECK(line_of(h + "0,0,0,0,-0.1,2,30\n") == 2);
  CHECK(line_of(h + "-1,0,0,0,-0.1,1,30\n") == 2);
  CHECK(line_of(h + "0,0,0,0,-0.1,1,30 \n") == 2);
  CHECK(line_of(h + "0,0,0,0,-0.1,1,30\n") == 0);
}

TEST_CASE("summary of an all-success log") {
  const RunMetrics m = from_success(std::vector<std::vector<int>>(150, std::vector<int>(3, 1)));
  const auto s = summarize(m.records, 100);
  CHECK(s.at("final_success_probability").get<double>() == 1.0);
  CHECK(s.at("mean_success_probability").get<double>() == 1.0);
  CHECK(s.at("steps").get<int>() == 150);
}

TEST_CASE("summary of alternating success") {
  std::vector<std::vector<int>> steps;
  for (int t = 0; t < 200; ++t) steps.push_back({t % 2, t % 2});
  const auto s = summarize(from_success(steps).records, 100);
  CHECK(s.at("final_success_probability").get<double>() == 0.5);
}

TEST_CASE("summary of a hand-built ten row log") {
  const auto rows = parse_metrics_csv(kTenRows);
  REQUIRE(rows.size() == 10);
  const auto s = summarize(rows, 2);
  // Per-step network success: 0.5, 1, 0.5, 1, 0.5.
  CHECK(s.at("steps").get<int>() == 5);
  CHECK(s.at("final_success_probability").get<double>() == 0.75);
  CHECK(s.at("mean_success_probability").get<double>() == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(s.at("cumulative_reward").get<double>() == doctest::Approx(-48.4).epsilon(1e-14));
  const auto& a0 = s.at("agents")[0];
  const auto& a1 = s.at("agents")[1];
  CHECK(a0.at("rows").get<int>() == 5);
  CHECK(a0.at("power_selection").get<std::vector<double>>() == std::vector<double>{0.8, 0.2, 0.0});
  CHECK(a0.at("frequency_selection").get<std::vector<double>>() == std::vector<double>{0.4, 0.6});
  CHECK(a0.at("cumulative_reward").get<double>() == doctest::Approx(-14.3).epsilon(1e-14));
  CHECK(a1.at("power_selection").get<std::vector<double>>() == std::vector<double>{0.2, 0.4, 0.4});
  CHECK(a1.at("frequency_selection").get<std::vector<double>>() == std::vector<double>{0.8, 0.2});
  CHECK(a1.at("cumulative_reward").get<double>() == doctest::Approx(-34.1).epsilon(1e-14));
  CHECK(s.dump() == summarize(rows, 2).dump());
}

TEST_CASE("summary with too few steps has no final probability") {
  const auto s = summarize(parse_metrics_csv(kTenRows), 100);
  CHECK(s.at("final_success_probability").is_null());
}

TEST_CASE("selection probabilities sum to one") {
  Rng rng(3);
  std::vector<StepRecord> rows;
  for (std::uint64_t t = 0; t < 3000; ++t) {
    rows.push_back({t / 5, static_cast<std::uint32_t>(t % 5),
                    static_cast<std::uint32_t>(uniform_index(rng, 3)),
                    static_cast<std::uint32_t>(uniform_index(rng, 2)), -1.0, true, 0.0});
  }
  const auto s = summarize(rows, 100);
  for (const auto& a : s.at("agents")) {
    for (const char* key : {"power_selection", "frequency_selection"}) {
      double sum = 0.0;
      for (double v : a.at(key)) sum += v;
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}
