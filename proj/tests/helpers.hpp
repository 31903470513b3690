#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "specgrid/net_model.hpp"
#include "specgrid/rng.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("specgrid_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Random valid scenario with n pairs inside an area x area box.
inline specgrid::NetworkScenario random_scenario(std::size_t n, double area,
                                                 specgrid::Rng& rng) {
  specgrid::NetworkScenario s;
  s.name = "random";
  s.area_w = area;
  s.area_h = area;
  for (std::size_t i = 0; i < n; ++i) {
    specgrid::TxRxPair p;
    p.pair_id = i;
    p.tx_pos = {specgrid::uniform_real(rng, 0.0, area), specgrid::uniform_real(rng, 0.0, area)};
    do {
      p.rx_pos = {specgrid::uniform_real(rng, 0.0, area),
                  specgrid::uniform_real(rng, 0.0, area)};
    } while (p.rx_pos == p.tx_pos);
    p.assigned_frequency = specgrid::uniform_index(rng, s.n_f);
    s.pairs.push_back(p);
  }
  return s;
}

/// Two-pair scenario with a single link of the given length per pair.
inline specgrid::NetworkScenario line_scenario(std::vector<specgrid::TxRxPair> pairs,
                                               double area = 100.0) {
  specgrid::NetworkScenario s;
  s.name = "line";
  s.area_w = area;
  s.area_h = area;
  s.pairs = std::move(pairs);
  return s;
}

}  // namespace testing
