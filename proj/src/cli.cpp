#include "odc/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>

#include "odc/config.hpp"
#include "odc/metrics.hpp"
#include "odc/report.hpp"

namespace odc {

namespace {

namespace fs = std::filesystem;

struct RunOptions {
  bool emit_events = false;
  bool emit_bounds = false;
  Slot timeseries_stride = 0;  // 0: horizon / 1000
};

struct Plan {
  Json preset = nullptr;
  std::uint64_t trials = 30;
  std::vector<SimConfig> configs;
  Json notes = Json::object();
  RunOptions options;
};

Json options_json(const RunOptions& o) {
  return {{"emit_events", o.emit_events},
          {"emit_bounds", o.emit_bounds},
          {"timeseries_stride", o.timeseries_stride}};
}

Json plan_core(const Plan& plan) {
  Json configs = Json::array();
  for (const auto& c : plan.configs) configs.push_back(config_to_json(c));
  return {{"preset", plan.preset}, {"trials", plan.trials}, {"options", options_json(plan.options)},
          {"configs", std::move(configs)}};
}

Json manifest_json(const Plan& plan) {
  Json m = plan_core(plan);
  m["tool"] = "odcsim";
  m["version"] = kToolVersion;
  m["config_hash"] = fnv1a_hex(plan_core(plan).dump());
  m["notes"] = plan.notes;
  Json outputs{{"manifest", "manifest.json"},
               {"summary", "summary.csv"},
               {"aggregate", "aggregate.csv"},
               {"timeseries", "timeseries.csv"}};
  if (plan.options.emit_events) outputs["events"] = "events.jsonl";
  if (plan.options.emit_bounds) outputs["bounds"] = "bounds.jsonl";
  m["outputs"] = std::move(outputs);
  return m;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

std::vector<SimConfig> apply_overrides(std::vector<SimConfig> configs, const PresetOverrides& ov) {
  std::vector<SimConfig> out;
  for (auto& c : configs) {
    if (ov.protocol && c.protocol != *ov.protocol) continue;
    if (ov.policy && c.policy != *ov.policy) continue;
    if (ov.threshold) c.threshold = *ov.threshold;
    if (ov.delay) c.delay = *ov.delay;
    if (ov.horizon) c.horizon = *ov.horizon;
    if (ov.seed) c.seed = *ov.seed;
    validate(c);
    out.push_back(std::move(c));
  }
  if (out.empty()) throw ConfigError("overrides leave no configuration to run");
  return out;
}

Plan plan_from_file(const std::string& path, const PresetOverrides& ov, RunOptions& flags) {
  const Json j = read_json_file(path);
  Plan plan;
  if (j.is_object() && j.contains("configs")) {
    plan.preset = j.value("preset", Json(nullptr));
    plan.trials = j.value("trials", std::uint64_t{30});
    if (j.contains("notes")) plan.notes = j["notes"];
    if (j.contains("options")) {
      const auto& o = j["options"];
      flags.emit_events = flags.emit_events || o.value("emit_events", false);
      flags.emit_bounds = flags.emit_bounds || o.value("emit_bounds", false);
      if (flags.timeseries_stride == 0) flags.timeseries_stride = o.value("timeseries_stride", Slot{0});
    }
    for (const auto& c : j["configs"]) plan.configs.push_back(config_from_json(c));
  } else if (j.is_array()) {
    for (const auto& c : j) plan.configs.push_back(config_from_json(c));
  } else {
    plan.configs.push_back(config_from_json(j));
  }
  if (plan.configs.empty()) throw ConfigError("config file lists no configurations");
  if (ov.trials) plan.trials = *ov.trials;
  if (plan.trials < 1) throw ConfigError("trials must be >= 1");
  plan.configs = apply_overrides(std::move(plan.configs), ov);
  return plan;
}

void open_or_throw(std::ofstream& f, const fs::path& p) {
  f.open(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
}

void execute(const Plan& plan, const fs::path& out_dir, unsigned parallelism, std::ostream& log) {
  std::ofstream manifest, summary, aggregate, timeseries, events, bounds;
  open_or_throw(manifest, out_dir / "manifest.json");
  manifest << manifest_json(plan).dump(2) << '\n';
  manifest.close();

  open_or_throw(summary, out_dir / "summary.csv");
  open_or_throw(aggregate, out_dir / "aggregate.csv");
  open_or_throw(timeseries, out_dir / "timeseries.csv");
  if (plan.options.emit_events) open_or_throw(events, out_dir / "events.jsonl");
  if (plan.options.emit_bounds) open_or_throw(bounds, out_dir / "bounds.jsonl");
  write_summary_header(summary);
  write_timeseries_header(timeseries);
  Aggregator agg;

  const unsigned batch = std::max(1u, parallelism);
  for (auto config : plan.configs) {
    config.log.record_messages = plan.options.emit_events;
    config.log.record_counters = plan.options.emit_bounds;
    const auto instance = resolve_instance(config);
    const Slot stride = plan.options.timeseries_stride > 0
                            ? plan.options.timeseries_stride
                            : std::max<Slot>(1, config.horizon / 1000);
    log << config.name << ": " << plan.trials << " trial(s)\n";
    for (std::uint64_t first = 0; first < plan.trials; first += batch) {
      const std::uint64_t count = std::min<std::uint64_t>(batch, plan.trials - first);
      std::vector<TrialLog> logs(count);
      if (count == 1) {
        logs[0] = run_trial(config, first);
      } else {
        std::vector<std::exception_ptr> failures(count);
        {
          std::vector<std::jthread> pool;
          for (std::uint64_t i = 0; i < count; ++i) {
            pool.emplace_back([&, i] {
              try {
                logs[i] = run_trial(config, first + i);
              } catch (...) {
                failures[i] = std::current_exception();
              }
            });
          }
        }
        for (const auto& f : failures) {
          if (f) std::rethrow_exception(f);
        }
      }
      for (const auto& trial_log : logs) {
        const auto m = summarize(trial_log, config, instance);
        write_summary_row(summary, config, trial_log.trial, m);
        agg.add(config, m);
        std::vector<std::vector<ArmId>> sets;
        if (config.heterogeneous()) sets = local_arm_sets(config, instance.num_arms());
        const auto regret = group_regret(trial_log, instance, sets.empty() ? nullptr : &sets);
        write_timeseries(timeseries, config, trial_log, regret, stride);
        if (plan.options.emit_events) write_events(events, config, trial_log);
        if (plan.options.emit_bounds) write_bounds(bounds, config, trial_log, instance);
      }
    }
  }
  agg.write(aggregate);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asynchronous cooperative multi-agent bandit simulator", "odcsim"};
  std::string preset_name, config_path, out_dir = "out", threshold_text, protocol_text, policy_text;
  std::uint64_t seed = 0, trials = 0, delay = 0, horizon = 0, stride = 0;
  unsigned parallelism = 1;
  RunOptions flags;
  auto* preset_opt = app.add_option("--preset", preset_name, "Named preset")
                         ->check(CLI::IsMember(preset_names()));
  auto* config_opt = app.add_option("--config", config_path, "Config, config list or manifest JSON");
  preset_opt->excludes(config_opt);
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* trials_opt = app.add_option("--trials", trials, "Trials per config")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--protocol", protocol_text, "Keep only odc or ibc configs")->check(CLI::IsMember({"odc", "ibc"}));
  app.add_option("--policy", policy_text, "Keep only ucb or aae configs")->check(CLI::IsMember({"ucb", "aae"}));
  app.add_option("--threshold", threshold_text, "constant:A | geometric:A | candidate-doubling");
  auto* delay_opt = app.add_option("--delay", delay, "Message delay in slots");
  auto* horizon_opt = app.add_option("--horizon", horizon, "Override horizon T")->check(CLI::PositiveNumber);
  app.add_option("--timeseries-stride", stride, "Slots between time-series rows");
  app.add_flag("--emit-events", flags.emit_events, "Write events.jsonl");
  app.add_flag("--emit-bounds", flags.emit_bounds, "Write bounds.jsonl and the regret upper bound");
  app.add_option("--parallelism", parallelism, "Trials run concurrently")->check(CLI::PositiveNumber);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  if (preset_name.empty() && config_path.empty()) {
    err << "error: one of --preset or --config is required\n" << app.help();
    return 2;
  }

  try {
    PresetOverrides ov;
    if (*seed_opt) ov.seed = seed;
    if (*trials_opt) ov.trials = trials;
    if (*horizon_opt) ov.horizon = horizon;
    if (*delay_opt) ov.delay = delay;
    if (!protocol_text.empty()) ov.protocol = parse_protocol(protocol_text);
    if (!policy_text.empty()) ov.policy = parse_policy(policy_text);
    if (!threshold_text.empty()) ov.threshold = parse_threshold(threshold_text);
    flags.timeseries_stride = stride;

    Plan plan;
    if (!preset_name.empty()) {
      auto preset = resolve_preset(preset_name, ov);
      plan.preset = preset.name;
      plan.trials = preset.trials;
      plan.configs = std::move(preset.configs);
      plan.notes = std::move(preset.notes);
    } else {
      plan = plan_from_file(config_path, ov, flags);
    }
    plan.options = flags;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
      err << "error: cannot create output directory " << out_dir << "\n";
      return 1;
    }
    execute(plan, out_dir, parallelism, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace odc
