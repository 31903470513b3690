#include "specgrid/presets.hpp"

#include <cmath>
#include <numbers>

#include "specgrid/error.hpp"

namespace specgrid {

namespace {

// A cluster is two 20 m links, the second one shifted along the first by
// `shift`. The trailing receiver sits close to the leading transmitter, so
// on a shared channel only one of the two links gets through; on separate
// channels both do.
struct ClusterSpec {
  double cx;
  double cy;
  double angle_deg;
  double lateral;      // perpendicular offset between the two links
  double shift;        // along-link offset of the second link
  std::size_t freq_a;  // assigned frequency of the first link
  std::size_t freq_b;
};

struct SingleSpec {
  double cx;
  double cy;
  double angle_deg;
  std::size_t freq;
};

constexpr double kLinkLength = 20.0;

Position at(double cx, double cy, double angle_deg, double along, double across) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  return {cx + along * std::cos(a) - across * std::sin(a),
          cy + along * std::sin(a) + across * std::cos(a)};
}

NetworkScenario build(std::string name, double area, double step, std::uint64_t seed,
                      const std::vector<ClusterSpec>& clusters,
                      const std::vector<SingleSpec>& singles = {}) {
  NetworkScenario s;
  s.name = std::move(name);
  s.area_w = area;
  s.area_h = area;
  s.mobility = {step, step > 0.0};
  s.seed = seed;
  auto add = [&](Position tx, Position rx, std::size_t f) {
    s.pairs.push_back({s.pairs.size(), tx, rx, f});
  };
  for (const auto& c : clusters) {
    const double half = kLinkLength / 2.0;
    const double off = c.shift / 2.0;
    add(at(c.cx, c.cy, c.angle_deg, -half - off, 0.0),
        at(c.cx, c.cy, c.angle_deg, half - off, 0.0), c.freq_a);
    add(at(c.cx, c.cy, c.angle_deg, -half + off, c.lateral),
        at(c.cx, c.cy, c.angle_deg, half + off, c.lateral), c.freq_b);
  }
  for (const auto& p : singles) {
    const double half = kLinkLength / 2.0;
    add(at(p.cx, p.cy, p.angle_deg, -half, 0.0), at(p.cx, p.cy, p.angle_deg, half, 0.0), p.freq);
  }
  validate(s);
  return s;
}

}  // namespace

std::vector<NetworkScenario> preset_scenarios() {
  std::vector<NetworkScenario> out;
  out.push_back(build("six_pair", 200.0, 0.05, 6,
                      {{50, 50, 0, 0, 8, 0, 1}, {150, 60, 90, 0, 8, 0, 1},
                       {90, 150, 45, 0, 8, 0, 1}}));
  out.push_back(build("gen_train_1", 160.0, 0.1, 101,
                      {{45, 45, 0, 0, 8, 0, 1}, {115, 115, 90, 0, 8, 0, 1}}));
  out.push_back(build("gen_train_2", 200.0, 0.1, 102,
                      {{45, 50, 30, 0, 7, 0, 1}, {150, 50, 120, 0, 9, 0, 1},
                       {100, 150, 0, 0, 8, 0, 1}},
                      {{170, 160, 60, 0}}));
  out.push_back(build("gen_train_3", 160.0, 0.1, 103,
                      {{40, 40, 0, 0, 7.5, 0, 1}, {120, 45, 60, 0, 8.5, 0, 1},
                       {80, 120, 150, 0, 8, 0, 1}},
                      {{25, 130, 90, 1}}));
  out.push_back(build("gen_train_4", 220.0, 0.1, 104,
                      {{50, 50, 0, 0, 8, 0, 1}, {170, 50, 90, 0, 7, 0, 1},
                       {50, 170, 180, 0, 9, 0, 1}, {170, 170, 270, 0, 8, 0, 1}}));
  out.push_back(build("gen_train_5", 180.0, 0.1, 105,
                      {{50, 50, 200, 0, 8, 0, 1}, {130, 60, 20, 0, 8.5, 0, 1}},
                      {{90, 140, 0, 0}, {150, 150, 90, 1}}));
  out.push_back(build("unseen_10", 260.0, 0.05, 110,
                      {{50, 50, 10, 0, 8, 0, 1}, {210, 50, 100, 0, 8, 1, 0},
                       {130, 130, 200, 0, 8, 0, 1}, {50, 210, 290, 0, 8, 1, 0},
                       {210, 210, 45, 0, 8, 0, 1}}));
  out.push_back(build("unseen_15", 300.0, 0.05, 115,
                      {{50, 50, 0, 0, 8, 0, 1}, {150, 50, 90, 0, 8, 1, 0},
                       {250, 50, 180, 0, 8, 0, 1}, {50, 150, 270, 0, 8, 1, 0},
                       {150, 150, 30, 0, 8, 0, 1}, {250, 150, 120, 0, 8, 1, 0},
                       {100, 250, 210, 0, 8, 0, 1}},
                      {{220, 250, 0, 1}}));
  return out;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& s : preset_scenarios()) names.push_back(s.name);
  return names;
}

NetworkScenario preset(const std::string& name) {
  for (auto& s : preset_scenarios()) {
    if (s.name == name) return s;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace specgrid
