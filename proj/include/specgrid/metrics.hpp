#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "specgrid/error.hpp"

namespace specgrid {

/// One agent in one slot.
struct StepRecord {
  std::uint64_t step = 0;
  std::uint32_t agent = 0;
  std::uint32_t power_index = 0;
  std::uint32_t freq_index = 0;
  double reward = 0.0;
  bool success = false;
  double sinr_db = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// Step-major log of a run: rows are ordered by step, then agent.
struct RunMetrics {
  std::size_t n_agents = 0;
  std::size_t n_p = 0;
  std::size_t n_f = 0;
  std::vector<StepRecord> records;
  std::vector<double> step_loss;  // mean loss of agents that learned that slot
  std::size_t aggregation_barriers = 0;

  std::size_t n_steps() const { return n_agents == 0 ? 0 : records.size() / n_agents; }
};

/// Mean over agents of the success indicator, one value per step.
std::vector<double> network_success(std::span<const StepRecord> records, std::size_t n_agents);

/// Trailing-window means; entry i covers steps [i, i + window). Empty when
/// fewer than `window` steps exist.
std::vector<double> windowed(std::span<const double> series, std::size_t window);

std::optional<double> final_windowed_success(const RunMetrics& m, std::size_t window);

/// First step t whose trailing window [t - window + 1, t] reaches threshold.
std::optional<std::size_t> steps_to_reach(const RunMetrics& m, std::size_t window,
                                          double threshold);

/// Fraction of agent-slots on each frequency over steps [from_step, end).
std::vector<double> frequency_fractions(const RunMetrics& m, std::size_t from_step);

/// Success fraction over steps [from_step, to_step).
double success_rate(const RunMetrics& m, std::size_t from_step, std::size_t to_step);

inline constexpr const char* kMetricsCsvHeader =
    "step,agent,power_index,freq_index,reward,success,sinr_db";

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

void write_metrics_csv(const std::filesystem::path& path, std::span<const StepRecord> records);
std::string metrics_csv_text(std::span<const StepRecord> records);

class CsvError : public ConfigError {
 public:
  CsvError(std::size_t line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::vector<StepRecord> parse_metrics_csv(const std::string& text);
std::vector<StepRecord> read_metrics_csv(const std::filesystem::path& path);

/// Final windowed success probability, per-agent power/frequency selection
/// probabilities and cumulative rewards. Deterministic for a given input.
nlohmann::json summarize(std::span<const StepRecord> records, std::size_t window);

}  // namespace specgrid
