#include "specgrid/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace specgrid {

using nlohmann::json;

std::vector<double> network_success(std::span<const StepRecord> records, std::size_t n_agents) {
  std::vector<double> out;
  if (n_agents == 0) return out;
  out.reserve(records.size() / n_agents);
  for (std::size_t i = 0; i + n_agents <= records.size(); i += n_agents) {
    std::size_t ok = 0;
    for (std::size_t a = 0; a < n_agents; ++a) ok += records[i + a].success ? 1 : 0;
    out.push_back(static_cast<double>(ok) / static_cast<double>(n_agents));
  }
  return out;
}

std::vector<double> windowed(std::span<const double> series, std::size_t window) {
  std::vector<double> out;
  if (window == 0 || series.size() < window) return out;
  out.reserve(series.size() - window + 1);
  // Recompute each window from scratch: exact and order-stable.
  for (std::size_t i = 0; i + window <= series.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = i; j < i + window; ++j) sum += series[j];
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

std::optional<double> final_windowed_success(const RunMetrics& m, std::size_t window) {
  const auto series = network_success(m.records, m.n_agents);
  if (window == 0 || series.size() < window) return std::nullopt;
  double sum = 0.0;
  for (std::size_t j = series.size() - window; j < series.size(); ++j) sum += series[j];
  return sum / static_cast<double>(window);
}

std::optional<std::size_t> steps_to_reach(const RunMetrics& m, std::size_t window,
                                          double threshold) {
  const auto w = windowed(network_success(m.records, m.n_agents), window);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= threshold) return i + window - 1;
  }
  return std::nullopt;
}

std::vector<double> frequency_fractions(const RunMetrics& m, std::size_t from_step) {
  std::vector<double> counts(std::max<std::size_t>(m.n_f, 1), 0.0);
  double total = 0.0;
  for (const auto& r : m.records) {
    if (r.step < from_step) continue;
    if (r.freq_index >= counts.size()) counts.resize(r.freq_index + 1, 0.0);
    counts[r.freq_index] += 1.0;
    total += 1.0;
  }
  if (total > 0.0) {
    for (double& c : counts) c /= total;
  }
  return counts;
}

double success_rate(const RunMetrics& m, std::size_t from_step, std::size_t to_step) {
  double ok = 0.0;
  double n = 0.0;
  for (const auto& r : m.records) {
    if (r.step < from_step || r.step >= to_step) continue;
    ok += r.success ? 1.0 : 0.0;
    n += 1.0;
  }
  return n > 0.0 ? ok / n : 0.0;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string metrics_csv_text(std::span<const StepRecord> records) {
  std::string out;
  out.reserve(48 * (records.size() + 1));
  out += kMetricsCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += std::to_string(r.agent);
    out += ',';
    out += std::to_string(r.power_index);
    out += ',';
    out += std::to_string(r.freq_index);
    out += ',';
    out += format_double(r.reward);
    out += ',';
    out += r.success ? '1' : '0';
    out += ',';
    out += format_double(r.sinr_db);
    out += '\n';
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const StepRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const std::string text = metrics_csv_text(records);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

namespace {

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  T value{};
  auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw CsvError(line, std::string("bad ") + name + " value '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<StepRecord> parse_metrics_csv(const std::string& text) {
  std::vector<StepRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!header_seen) {
      if (line != kMetricsCsvHeader) throw CsvError(line_no, "unexpected header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 7) {
      throw CsvError(line_no, "expected 7 fields, found " + std::to_string(f.size()));
    }
    StepRecord r;
    r.step = parse_field<std::uint64_t>(f[0], line_no, "step");
    r.agent = parse_field<std::uint32_t>(f[1], line_no, "agent");
    r.power_index = parse_field<std::uint32_t>(f[2], line_no, "power_index");
    r.freq_index = parse_field<std::uint32_t>(f[3], line_no, "freq_index");
    r.reward = parse_field<double>(f[4], line_no, "reward");
    const int s = parse_field<int>(f[5], line_no, "success");
    if (s != 0 && s != 1) throw CsvError(line_no, "success must be 0 or 1");
    r.success = s == 1;
    r.sinr_db = parse_field<double>(f[6], line_no, "sinr_db");
    out.push_back(r);
  }
  if (!header_seen) throw CsvError(1, "missing header");
  return out;
}

std::vector<StepRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open metrics file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_metrics_csv(ss.str());
}

json summarize(std::span<const StepRecord> records, std::size_t window) {
  if (window == 0) throw ConfigError("summary window must be positive");
  std::size_t n_agents = 0;
  std::size_t n_p = 0;
  std::size_t n_f = 0;
  for (const auto& r : records) {
    n_agents = std::max<std::size_t>(n_agents, r.agent + 1);
    n_p = std::max<std::size_t>(n_p, r.power_index + 1);
    n_f = std::max<std::size_t>(n_f, r.freq_index + 1);
  }

  // Network success per step, averaged over the agents present in that step.
  std::map<std::uint64_t, std::pair<double, double>> per_step;
  std::vector<std::vector<double>> power(n_agents, std::vector<double>(n_p, 0.0));
  std::vector<std::vector<double>> freq(n_agents, std::vector<double>(n_f, 0.0));
  std::vector<double> rows(n_agents, 0.0);
  std::vector<double> reward(n_agents, 0.0);
  double total_reward = 0.0;
  for (const auto& r : records) {
    auto& s = per_step[r.step];
    s.first += r.success ? 1.0 : 0.0;
    s.second += 1.0;
    power[r.agent][r.power_index] += 1.0;
    freq[r.agent][r.freq_index] += 1.0;
    rows[r.agent] += 1.0;
    reward[r.agent] += r.reward;
    total_reward += r.reward;
  }
  std::vector<double> series;
  series.reserve(per_step.size());
  for (const auto& [step, s] : per_step) series.push_back(s.first / s.second);

  json agents = json::array();
  for (std::size_t a = 0; a < n_agents; ++a) {
    if (rows[a] > 0.0) {
      for (double& v : power[a]) v /= rows[a];
      for (double& v : freq[a]) v /= rows[a];
    }
    agents.push_back({{"agent", a},
                      {"rows", static_cast<std::uint64_t>(rows[a])},
                      {"power_selection", power[a]},
                      {"frequency_selection", freq[a]},
                      {"cumulative_reward", reward[a]}});
  }

  json out;
  out["steps"] = series.size();
  out["window"] = window;
  if (series.size() >= window) {
    double sum = 0.0;
    for (std::size_t j = series.size() - window; j < series.size(); ++j) sum += series[j];
    out["final_success_probability"] = sum / static_cast<double>(window);
  } else {
    out["final_success_probability"] = nullptr;
  }
  double overall = 0.0;
  for (double v : series) overall += v;
  out["mean_success_probability"] = series.empty() ? 0.0 : overall / static_cast<double>(series.size());
  out["cumulative_reward"] = total_reward;
  out["agents"] = agents;
  return out;
}

}  // namespace specgrid
