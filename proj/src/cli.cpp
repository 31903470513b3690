#include "specgrid/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "specgrid/aggregation.hpp"
#include "specgrid/checkpoint.hpp"
#include "specgrid/error.hpp"
#include "specgrid/metrics.hpp"
#include "specgrid/presets.hpp"
#include "specgrid/scenario_io.hpp"
#include "specgrid/training.hpp"

namespace specgrid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunOptions {
  std::string scenario_file;
  std::string preset_name;
  std::vector<std::string> scenario_files;
  std::vector<std::string> preset_list;
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string store_dir;
  std::string manifest_file;
  // eval
  std::string checkpoint_file;
  std::string checkpoint_name;
  std::optional<std::size_t> steps;
  // train-multi
  std::string prefix = "gen";
  std::string resume;
  // aggregate
  std::vector<std::string> names;
  // inspect
  std::string metrics_file;
  std::size_t window = 100;
};

json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string file_crc(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", crc32_of(bytes));
  return std::string("crc32:") + buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// Everything a run needs, resolved before any output is created.
struct ResolvedRun {
  std::vector<NetworkScenario> scenarios;
  TrainConfig config;
  std::uint64_t seed = 1;
  json manifest_in;  // when rerunning from a manifest
};

ResolvedRun resolve(const RunOptions& o, const std::string& command, bool multi) {
  ResolvedRun r;
  if (!o.manifest_file.empty()) {
    r.manifest_in = read_json_file(o.manifest_file, "manifest");
    if (r.manifest_in.value("command", "") != command) {
      throw ConfigError("manifest was written by '" + r.manifest_in.value("command", "?") +
                        "', not '" + command + "'");
    }
    try {
      for (const auto& s : r.manifest_in.at("scenarios")) r.scenarios.push_back(scenario_from_json(s));
      r.config = train_config_from_json(r.manifest_in.at("config"));
      r.seed = r.manifest_in.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
    return r;
  }
  if (!o.config_file.empty()) {
    r.config = train_config_from_json(read_json_file(o.config_file, "config"));
  }
  if (multi) {
    for (const auto& f : o.scenario_files) r.scenarios.push_back(load_scenario(f));
    for (const auto& p : o.preset_list) r.scenarios.push_back(preset(p));
  } else {
    if (!o.scenario_file.empty() && !o.preset_name.empty()) {
      throw ConfigError("give either --scenario or --preset, not both");
    }
    if (!o.scenario_file.empty()) r.scenarios.push_back(load_scenario(o.scenario_file));
    if (!o.preset_name.empty()) r.scenarios.push_back(preset(o.preset_name));
  }
  if (r.scenarios.empty()) throw ConfigError("no scenario given");
  r.seed = o.seed ? *o.seed : r.config.seeds.front();
  return r;
}

json base_manifest(const std::string& command, const ResolvedRun& r) {
  json scenarios = json::array();
  for (const auto& s : r.scenarios) scenarios.push_back(scenario_to_json(s));
  return json{{"schema_version", 1},
              {"command", command},
              {"seed", r.seed},
              {"config", train_config_to_json(r.config)},
              {"scenarios", scenarios}};
}

CheckpointStore store_for(const RunOptions& o, const fs::path& fallback) {
  if (!o.store_dir.empty()) return CheckpointStore(o.store_dir);
  return CheckpointStore::from_env(fallback);
}

void finish(const fs::path& out_dir, json manifest, const std::vector<std::string>& files) {
  json artifacts = json::object();
  for (const auto& f : files) artifacts[f] = file_crc(out_dir / f);
  manifest["artifacts"] = artifacts;
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

int cmd_train(const RunOptions& o, bool independent) {
  const std::string command = independent ? "train-independent" : "train";
  ResolvedRun r = resolve(o, command, false);
  const fs::path out_dir = o.out_dir;
  const NetworkScenario& scenario = r.scenarios.front();
  TrainResult tr = independent ? train_independent(scenario, r.config, r.seed)
                               : train_network(scenario, r.config, r.seed);

  fs::create_directories(out_dir);
  CheckpointStore store = store_for(o, out_dir / "checkpoints");
  const Architecture arch = architecture_for(r.config, scenario);
  auto save = [&](const std::string& name, const QNetwork& net) {
    CheckpointMeta meta{scenario.name, r.config.total_steps, utc_timestamp()};
    meta.extra = json{{"command", command}, {"seed", r.seed}};
    store.save(name, ModelCheckpoint::from_network(net, arch.k, arch.n_p, arch.n_f, meta));
  };
  const std::string base = scenario.name.empty() ? "scenario" : scenario.name;
  const std::string tag = base + (independent ? "_independent" : "_aggregated");
  save(tag, average_models(std::span<const QNetwork>(tr.models)));
  for (std::size_t i = 0; i < tr.models.size(); ++i) {
    save(tag + "_agent" + std::to_string(i), tr.models[i]);
  }

  write_metrics_csv(out_dir / "metrics.csv", tr.metrics.records);
  json summary = summarize(tr.metrics.records, r.config.success_window);
  summary["aggregation_barriers"] = tr.metrics.aggregation_barriers;
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");

  json manifest = base_manifest(command, r);
  manifest["store"] = store.root().string();
  manifest["checkpoints"] = tag;
  finish(out_dir, manifest, {"metrics.csv", "summary.json"});
  return kExitOk;
}

int cmd_train_multi(const RunOptions& o) {
  ResolvedRun r = resolve(o, "train-multi", true);
  const fs::path out_dir = o.out_dir;
  fs::create_directories(out_dir);
  CheckpointStore store = store_for(o, out_dir / "checkpoints");
  GeneralizedOptions gopt;
  gopt.prefix = o.prefix;
  if (!o.resume.empty()) gopt.resume_from = o.resume;
  GeneralizedResult g = generalized_train(r.scenarios, r.config, r.seed, store, gopt);

  // Combined log with a global step counter, plus one file per segment.
  std::vector<StepRecord> combined;
  json segments = json::array();
  std::uint64_t offset = 0;
  std::vector<std::string> files{"metrics.csv"};
  fs::create_directories(out_dir / "segments");
  for (std::size_t k = 0; k < g.segments.size(); ++k) {
    const Segment& s = g.segments[k];
    json seg{{"phase", static_cast<int>(s.phase)},
             {"loop", s.loop},
             {"scenario_index", s.scenario_index},
             {"scenario", s.scenario_name},
             {"checkpoint", s.checkpoint},
             {"steps", s.metrics.n_steps()}};
    if (s.phase != Phase::Aggregate) {
      char name[96];
      std::snprintf(name, sizeof name, "segments/%03zu_p%d_l%zu_%s.csv", k,
                    static_cast<int>(s.phase), s.loop, s.scenario_name.c_str());
      write_metrics_csv(out_dir / name, s.metrics.records);
      files.emplace_back(name);
      seg["metrics"] = name;
      if (auto w = final_windowed_success(s.metrics, r.config.success_window)) {
        seg["final_success_probability"] = *w;
      }
      for (StepRecord rec : s.metrics.records) {
        rec.step += offset;
        combined.push_back(rec);
      }
      offset += s.metrics.n_steps();
    }
    segments.push_back(seg);
  }
  write_metrics_csv(out_dir / "metrics.csv", combined);
  json manifest = base_manifest("train-multi", r);
  manifest["store"] = store.root().string();
  manifest["prefix"] = o.prefix;
  if (!o.resume.empty()) manifest["resumed_from"] = o.resume;
  manifest["segments"] = segments;
  finish(out_dir, manifest, files);
  return kExitOk;
}

int cmd_eval(const RunOptions& o) {
  ResolvedRun r = resolve(o, "eval", false);
  std::string ckpt_path = o.checkpoint_file;
  if (!r.manifest_in.is_null()) ckpt_path = r.manifest_in.at("model").get<std::string>();
  if (ckpt_path.empty()) {
    if (o.checkpoint_name.empty()) throw ConfigError("eval needs --checkpoint or --name");
    ckpt_path = store_for(o, "checkpoints").path_for(o.checkpoint_name).string();
  }
  const NetworkScenario& scenario = r.scenarios.front();
  const ModelCheckpoint ckpt = read_checkpoint_file(ckpt_path);
  require_architecture(ckpt.arch, architecture_for(r.config, scenario), "eval model");
  std::size_t steps = o.steps ? *o.steps : r.config.eval_steps;
  if (!r.manifest_in.is_null()) steps = r.manifest_in.at("eval_steps").get<std::size_t>();
  if (steps == 0) throw ConfigError("--steps must be positive");

  const RunMetrics m = evaluate(ckpt.to_network(), scenario, r.config, steps, r.seed);
  const fs::path out_dir = o.out_dir;
  fs::create_directories(out_dir);
  write_metrics_csv(out_dir / "metrics.csv", m.records);
  write_text(out_dir / "summary.json", summarize(m.records, r.config.success_window).dump(2) + "\n");
  json manifest = base_manifest("eval", r);
  manifest["model"] = fs::absolute(ckpt_path).string();
  manifest["model_crc"] = file_crc(ckpt_path);
  manifest["eval_steps"] = steps;
  finish(out_dir, manifest, {"metrics.csv", "summary.json"});
  return kExitOk;
}

int cmd_aggregate(const RunOptions& o) {
  if (o.names.empty()) throw ConfigError("aggregate needs --names");
  CheckpointStore store = store_for(o, "checkpoints");
  std::vector<ModelCheckpoint> loaded;
  for (const auto& n : o.names) loaded.push_back(store.load(n));
  const QNetwork mean = aggregate_checkpoints(store, o.names);
  CheckpointMeta meta;
  meta.scenario = loaded.front().meta.scenario;
  meta.created = utc_timestamp();
  meta.extra = json{{"aggregated_from", o.names}};
  const Architecture& a = loaded.front().arch;
  write_checkpoint_file(o.out_dir, ModelCheckpoint::from_network(mean, a.k, a.n_p, a.n_f, meta));
  return kExitOk;
}

int cmd_inspect(const RunOptions& o, std::ostream& out) {
  const int given = !o.checkpoint_file.empty() + !o.metrics_file.empty() + !o.preset_name.empty();
  if (given != 1) throw ConfigError("inspect needs exactly one of --checkpoint, --metrics, --preset");
  json doc;
  if (!o.checkpoint_file.empty()) {
    const ModelCheckpoint c = read_checkpoint_file(o.checkpoint_file);
    doc = {{"layer_dims", c.arch.layer_dims},
           {"k", c.arch.k},
           {"n_p", c.arch.n_p},
           {"n_f", c.arch.n_f},
           {"parameters", c.params.size()},
           {"scenario", c.meta.scenario},
           {"training_step", c.meta.training_step},
           {"created", c.meta.created},
           {"extra", c.meta.extra}};
  } else if (!o.metrics_file.empty()) {
    doc = summarize(read_metrics_csv(o.metrics_file), o.window);
  } else {
    doc = scenario_to_json(preset(o.preset_name));
  }
  const std::string text = doc.dump(2) + "\n";
  if (o.out_dir.empty()) {
    out << text;
  } else {
    write_text(o.out_dir, text);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent DQN power/frequency control with model aggregation", "specgrid"};
  app.require_subcommand(1);
  RunOptions o;

  auto add_run_flags = [&](CLI::App* sub, bool multi) {
    if (multi) {
      sub->add_option("--scenarios", o.scenario_files, "Scenario JSON files")->delimiter(',');
      sub->add_option("--presets", o.preset_list, "Preset names")->delimiter(',');
    } else {
      sub->add_option("--scenario", o.scenario_file, "Scenario JSON file");
      sub->add_option("--preset", o.preset_name, "Built-in scenario name");
    }
    sub->add_option("--config", o.config_file, "Training config JSON file");
    sub->add_option("--seed", o.seed, "Run seed (default: first of config seeds)");
    sub->add_option("--store", o.store_dir, "Checkpoint store directory");
    sub->add_option("--from-manifest", o.manifest_file, "Rerun the run recorded in a manifest");
    sub->add_option("--out", o.out_dir, "Output directory")->required();
  };

  auto* train = app.add_subcommand("train", "Train one network with model aggregation");
  add_run_flags(train, false);
  auto* indep = app.add_subcommand("train-independent", "Train one network without aggregation");
  add_run_flags(indep, false);
  auto* multi = app.add_subcommand("train-multi", "Multi-network generalized training");
  add_run_flags(multi, true);
  multi->add_option("--prefix", o.prefix, "Checkpoint name prefix");
  multi->add_option("--resume", o.resume, "Resume from a phase-boundary checkpoint name");
  auto* eval = app.add_subcommand("eval", "Evaluate a frozen model on a scenario");
  add_run_flags(eval, false);
  eval->add_option("--checkpoint", o.checkpoint_file, "Checkpoint file");
  eval->add_option("--name", o.checkpoint_name, "Checkpoint name in the store");
  eval->add_option("--steps", o.steps, "Evaluation slots (default: config eval_steps)");
  auto* agg = app.add_subcommand("aggregate", "Average named checkpoints");
  agg->add_option("--store", o.store_dir, "Checkpoint store directory");
  agg->add_option("--names", o.names, "Checkpoint names")->delimiter(',')->required();
  agg->add_option("--out", o.out_dir, "Output checkpoint file")->required();
  auto* inspect = app.add_subcommand("inspect", "Describe a checkpoint, metrics CSV or preset");
  inspect->add_option("--checkpoint", o.checkpoint_file, "Checkpoint file");
  inspect->add_option("--metrics", o.metrics_file, "Metrics CSV to summarize");
  inspect->add_option("--window", o.window, "Success-probability window")->check(CLI::PositiveNumber);
  inspect->add_option("--preset", o.preset_name, "Preset scenario to print");
  inspect->add_option("--out", o.out_dir, "Write JSON here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (train->parsed()) return cmd_train(o, false);
    if (indep->parsed()) return cmd_train(o, true);
    if (multi->parsed()) return cmd_train_multi(o);
    if (eval->parsed()) return cmd_eval(o);
    if (agg->parsed()) return cmd_aggregate(o);
    if (inspect->parsed()) return cmd_inspect(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitConfigError;
}

}  // namespace specgrid
