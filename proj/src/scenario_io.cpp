#include "specgrid/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "specgrid/error.hpp"

namespace specgrid {

using nlohmann::json;

namespace json_strict {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(where + ": unknown field '" + it.key() + "'");
  }
}

void require_schema_version(const json& j, int expected, const std::string& where) {
  auto it = j.find("schema_version");
  if (it == j.end()) throw ConfigError(where + ": missing schema_version");
  if (!it->is_number_integer() || it->get<int>() != expected) {
    throw ConfigError(where + ": unsupported schema_version (expected " +
                      std::to_string(expected) + ")");
  }
}

}  // namespace json_strict

namespace {

using namespace json_strict;

json position_json(const Position& p) { return json{{"x", p.x}, {"y", p.y}}; }

Position position_from(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown(j, {"x", "y"}, where);
  if (!j.contains("x") || !j.contains("y")) throw ConfigError(where + ": needs x and y");
  Position p;
  read_optional(j, "x", p.x, where);
  read_optional(j, "y", p.y, where);
  return p;
}

TxRxPair pair_from(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown(j, {"pair_id", "tx_pos", "rx_pos", "assigned_frequency"}, where);
  for (const char* k : {"pair_id", "tx_pos", "rx_pos"}) {
    if (!j.contains(k)) throw ConfigError(where + ": missing " + k);
  }
  TxRxPair p;
  read_optional(j, "pair_id", p.pair_id, where);
  p.tx_pos = position_from(j.at("tx_pos"), where + ".tx_pos");
  p.rx_pos = position_from(j.at("rx_pos"), where + ".rx_pos");
  read_optional(j, "assigned_frequency", p.assigned_frequency, where);
  return p;
}

}  // namespace

json scenario_to_json(const NetworkScenario& s) {
  json pairs = json::array();
  for (const auto& p : s.pairs) {
    pairs.push_back({{"pair_id", p.pair_id},
                     {"tx_pos", position_json(p.tx_pos)},
                     {"rx_pos", position_json(p.rx_pos)},
                     {"assigned_frequency", p.assigned_frequency}});
  }
  const auto& ch = s.channel;
  return json{{"schema_version", kScenarioSchemaVersion},
              {"name", s.name},
              {"pairs", pairs},
              {"area_w", s.area_w},
              {"area_h", s.area_h},
              {"channel",
               {{"path_loss_exponent", ch.path_loss_exponent},
                {"reference_distance", ch.reference_distance},
                {"noise_power", ch.noise_power},
                {"processing_gain", ch.processing_gain},
                {"sinr_threshold", ch.sinr_threshold}}},
              {"mobility", {{"step_size", s.mobility.step_size}, {"enabled", s.mobility.enabled}}},
              {"power_levels_dbm", s.power_levels_dbm},
              {"n_f", s.n_f},
              {"seed", s.seed}};
}

NetworkScenario scenario_from_json(const json& doc) {
  const std::string where = "scenario";
  require_object(doc, where);
  reject_unknown(doc,
                 {"schema_version", "name", "pairs", "area_w", "area_h", "channel", "mobility",
                  "power_levels_dbm", "n_f", "seed"},
                 where);
  require_schema_version(doc, kScenarioSchemaVersion, where);

  NetworkScenario s;
  read_optional(doc, "name", s.name, where);
  if (!doc.contains("pairs") || !doc.at("pairs").is_array()) {
    throw ConfigError(where + ": 'pairs' must be an array");
  }
  const auto& pairs = doc.at("pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    s.pairs.push_back(pair_from(pairs[i], where + ".pairs[" + std::to_string(i) + "]"));
  }
  read_optional(doc, "area_w", s.area_w, where);
  read_optional(doc, "area_h", s.area_h, where);
  if (auto it = doc.find("channel"); it != doc.end()) {
    const std::string w = where + ".channel";
    require_object(*it, w);
    reject_unknown(*it,
                   {"path_loss_exponent", "reference_distance", "noise_power",
                    "processing_gain", "sinr_threshold"},
                   w);
    read_optional(*it, "path_loss_exponent", s.channel.path_loss_exponent, w);
    read_optional(*it, "reference_distance", s.channel.reference_distance, w);
    read_optional(*it, "noise_power", s.channel.noise_power, w);
    read_optional(*it, "processing_gain", s.channel.processing_gain, w);
    read_optional(*it, "sinr_threshold", s.channel.sinr_threshold, w);
  }
  if (auto it = doc.find("mobility"); it != doc.end()) {
    const std::string w = where + ".mobility";
    require_object(*it, w);
    reject_unknown(*it, {"step_size", "enabled"}, w);
    read_optional(*it, "step_size", s.mobility.step_size, w);
    read_optional(*it, "enabled", s.mobility.enabled, w);
  }
  read_optional(doc, "power_levels_dbm", s.power_levels_dbm, where);
  read_optional(doc, "n_f", s.n_f, where);
  read_optional(doc, "seed", s.seed, where);
  validate(s);
  return s;
}

NetworkScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from_json(doc);
}

void save_scenario(const NetworkScenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << scenario_to_json(scenario).dump(2) << '\n';
}

}  // namespace specgrid
