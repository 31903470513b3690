#pragma once

// Data-parallel kernels. Every kernel has a serial reference path and an
// OpenMP path; both produce bit-identical results, which the test suite
// checks and bench/ compares for speed.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "specgrid/net_model.hpp"

namespace specgrid::kernels {

enum class Exec { Serial, Parallel };

/// SINR in dB for every pair.
std::vector<double> sinr_all(const NetworkScenario& scenario,
                             std::span<const LinkPositions> positions,
                             std::span<const Transmission> actions, Exec exec);

/// Elementwise arithmetic mean of equally sized parameter vectors. Each
/// element sums its inputs in sorted order with compensation, so the result
/// does not depend on the order of the inputs.
std::vector<double> mean_parameters(std::span<const std::span<const double>> inputs, Exec exec);

/// Runs fn(i) for i in [0, n). Exceptions from any iteration are rethrown
/// on the calling thread (the first one wins).
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn, Exec exec);

}  // namespace specgrid::kernels
