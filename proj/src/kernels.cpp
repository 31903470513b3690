#include "specgrid/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

#include "specgrid/error.hpp"

namespace specgrid::kernels {

namespace {

double mean_of_element(std::span<const std::span<const double>> inputs, std::size_t e,
                       std::vector<double>& scratch) {
  scratch.clear();
  for (const auto& in : inputs) scratch.push_back(in[e]);
  std::sort(scratch.begin(), scratch.end());
  // Neumaier summation
  double sum = 0.0;
  double comp = 0.0;
  for (double v : scratch) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return (sum + comp) / static_cast<double>(scratch.size());
}

}  // namespace

std::vector<double> sinr_all(const NetworkScenario& scenario,
                             std::span<const LinkPositions> positions,
                             std::span<const Transmission> actions, Exec exec) {
  const std::size_t n = scenario.pairs.size();
  std::vector<double> out(n);
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = compute_sinr(scenario, positions, actions, i);
    return out;
  }
  for_each_index(
      n, [&](std::size_t i) { out[i] = compute_sinr(scenario, positions, actions, i); },
      Exec::Parallel);
  return out;
}

std::vector<double> mean_parameters(std::span<const std::span<const double>> inputs, Exec exec) {
  if (inputs.empty()) throw DimensionError("mean_parameters: no inputs");
  const std::size_t len = inputs.front().size();
  for (const auto& in : inputs) {
    if (in.size() != len) throw DimensionError("mean_parameters: length mismatch");
  }
  std::vector<double> out(len);
  if (exec == Exec::Serial) {
    std::vector<double> scratch;
    for (std::size_t e = 0; e < len; ++e) out[e] = mean_of_element(inputs, e, scratch);
    return out;
  }
  const long long n = static_cast<long long>(len);
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(static)
    for (long long e = 0; e < n; ++e) {
      out[static_cast<std::size_t>(e)] =
          mean_of_element(inputs, static_cast<std::size_t>(e), scratch);
    }
  }
  return out;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn, Exec exec) {
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(specgrid_for_each_index)
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace specgrid::kernels
