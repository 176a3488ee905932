#include "odc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace odc {

namespace {

std::uint64_t parse_u64(std::string_view text, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  }
  return v;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

const Json& require(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing field '") + key + "'");
  return *it;
}

Json presence_to_json(const std::vector<PresenceWindow>& windows) {
  Json out = Json::array();
  for (const auto& w : windows) {
    Json o{{"join", w.join_slot}};
    o["depart"] = w.depart_slot ? Json(*w.depart_slot) : Json(nullptr);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<PresenceWindow> presence_from_json(const Json& j) {
  std::vector<PresenceWindow> out;
  for (const auto& o : j) {
    PresenceWindow w;
    w.join_slot = require(o, "join").get<Slot>();
    if (o.contains("depart") && !o["depart"].is_null()) w.depart_slot = o["depart"].get<Slot>();
    out.push_back(w);
  }
  return out;
}

Json instance_to_json(const InstanceSource& src) {
  if (const auto* e = std::get_if<ExplicitMeans>(&src)) {
    return Json{{"type", "explicit"}, {"means", e->means}};
  }
  const auto& u = std::get<UniformMeans>(src);
  return Json{{"type", "uniform"}, {"k", u.k}, {"low", u.low}, {"high", u.high}};
}

InstanceSource instance_from_json(const Json& j) {
  const auto type = require(j, "type").get<std::string>();
  if (type == "explicit") return ExplicitMeans{require(j, "means").get<std::vector<double>>()};
  if (type == "uniform") {
    UniformMeans u;
    u.k = get_or<std::size_t>(j, "k", u.k);
    u.low = get_or<double>(j, "low", u.low);
    u.high = get_or<double>(j, "high", u.high);
    return u;
  }
  throw ConfigError("unknown instance type '" + type + "'");
}

// Preset building blocks ---------------------------------------------------

constexpr Slot kDefaultHorizon = 80000;
constexpr std::uint64_t kDefaultTrials = 30;

AgentSpec agent(std::string label, ActivationSchedule s) {
  AgentSpec a;
  a.label = std::move(label);
  a.schedule = std::move(s);
  return a;
}

void add_agents(std::vector<AgentSpec>& out, std::size_t n, const std::string& label,
                const ActivationSchedule& s, Slot join = 1) {
  for (std::size_t i = 0; i < n; ++i) {
    auto a = agent(label, s);
    a.presence = {PresenceWindow{join, std::nullopt}};
    out.push_back(std::move(a));
  }
}

struct Combo {
  PolicyKind policy;
  ProtocolKind protocol;
};

const std::vector<Combo>& all_combos() {
  static const std::vector<Combo> combos{{PolicyKind::kUcb, ProtocolKind::kIbc},
                                         {PolicyKind::kUcb, ProtocolKind::kOdc},
                                         {PolicyKind::kAae, ProtocolKind::kIbc},
                                         {PolicyKind::kAae, ProtocolKind::kOdc}};
  return combos;
}

struct Builder {
  std::string preset;
  std::vector<SimConfig> configs;

  void add(const std::string& sweep, const std::vector<AgentSpec>& agents, Slot horizon,
           const std::vector<Combo>& combos, const std::vector<ThresholdSchedule>& thresholds) {
    for (const auto& f : thresholds) {
      for (const auto& combo : combos) {
        SimConfig c;
        c.sweep_label = sweep;
        c.horizon = horizon;
        c.agents = agents;
        c.policy = combo.policy;
        c.protocol = combo.protocol;
        c.threshold = f;
        configs.push_back(std::move(c));
      }
    }
  }
};

}  // namespace

ThresholdSchedule parse_threshold(std::string_view text) {
  if (text == "candidate-doubling" || text == "candidate_doubling") return CandidateScaledDoubling{};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("threshold must look like constant:A");
  const auto kind = text.substr(0, colon);
  const auto a = parse_u64(text.substr(colon + 1), "threshold parameter");
  ThresholdSchedule s;
  if (kind == "constant") {
    s = ConstantThreshold{a};
  } else if (kind == "geometric") {
    s = GeometricThreshold{a};
  } else {
    throw ConfigError("unknown threshold kind '" + std::string(kind) + "'");
  }
  validate_threshold(s);
  return s;
}

ProtocolKind parse_protocol(std::string_view text) {
  if (text == "odc") return ProtocolKind::kOdc;
  if (text == "ibc") return ProtocolKind::kIbc;
  throw ConfigError("protocol must be odc or ibc, got '" + std::string(text) + "'");
}

PolicyKind parse_policy(std::string_view text) {
  if (text == "ucb") return PolicyKind::kUcb;
  if (text == "aae") return PolicyKind::kAae;
  throw ConfigError("policy must be ucb or aae, got '" + std::string(text) + "'");
}

std::string to_string(ProtocolKind kind) { return kind == ProtocolKind::kOdc ? "odc" : "ibc"; }
std::string to_string(PolicyKind kind) { return kind == PolicyKind::kUcb ? "ucb" : "aae"; }

Json schedule_to_json(const ActivationSchedule& s) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BernoulliRate>) {
          return {{"type", "bernoulli"}, {"p", v.p}};
        } else if constexpr (std::is_same_v<T, GeometricOnOff>) {
          return {{"type", "geometric_on_off"},
                  {"p", v.p},
                  {"switch_prob", v.switch_prob},
                  {"start_online", v.start_online}};
        } else if constexpr (std::is_same_v<T, SinePhase>) {
          return {{"type", "sine"}, {"phase", v.phase}, {"time_scale", v.time_scale}, {"use_abs", v.use_abs}};
        } else if constexpr (std::is_same_v<T, ExplicitSlots>) {
          return {{"type", "explicit"}, {"slots", v.slots}};
        } else {
          return {{"type", "halving"}, {"p0", v.p0}};
        }
      },
      s);
}

ActivationSchedule schedule_from_json(const Json& j) {
  const auto type = require(j, "type").get<std::string>();
  if (type == "bernoulli") return BernoulliRate{require(j, "p").get<double>()};
  if (type == "geometric_on_off") {
    GeometricOnOff g;
    g.p = require(j, "p").get<double>();
    g.switch_prob = get_or<double>(j, "switch_prob", g.switch_prob);
    g.start_online = get_or<bool>(j, "start_online", g.start_online);
    return g;
  }
  if (type == "sine") {
    SinePhase s;
    s.phase = require(j, "phase").get<double>();
    s.time_scale = get_or<double>(j, "time_scale", s.time_scale);
    s.use_abs = get_or<bool>(j, "use_abs", s.use_abs);
    return s;
  }
  if (type == "explicit") return ExplicitSlots{require(j, "slots").get<std::vector<Slot>>()};
  if (type == "halving") return HalvingRate{require(j, "p0").get<double>()};
  throw ConfigError("unknown schedule type '" + type + "'");
}

Json threshold_to_json(const ThresholdSchedule& s) {
  if (const auto* c = std::get_if<ConstantThreshold>(&s)) return {{"type", "constant"}, {"a", c->a}};
  if (const auto* g = std::get_if<GeometricThreshold>(&s)) return {{"type", "geometric"}, {"a", g->a}};
  return {{"type", "candidate_doubling"}};
}

ThresholdSchedule threshold_from_json(const Json& j) {
  const auto type = require(j, "type").get<std::string>();
  ThresholdSchedule s;
  if (type == "constant") {
    s = ConstantThreshold{require(j, "a").get<std::uint64_t>()};
  } else if (type == "geometric") {
    s = GeometricThreshold{require(j, "a").get<std::uint64_t>()};
  } else if (type == "candidate_doubling") {
    s = CandidateScaledDoubling{};
  } else {
    throw ConfigError("unknown threshold type '" + type + "'");
  }
  validate_threshold(s);
  return s;
}

Json config_to_json(const SimConfig& c) {
  Json agents = Json::array();
  for (const auto& a : c.agents) {
    Json o{{"label", a.label}, {"schedule", schedule_to_json(a.schedule)}, {"presence", presence_to_json(a.presence)}};
    if (!a.arms.empty()) o["arms"] = a.arms;
    agents.push_back(std::move(o));
  }
  return Json{{"name", c.name},
              {"sweep", c.sweep_label},
              {"instance", instance_to_json(c.instance)},
              {"horizon", c.horizon},
              {"agents", std::move(agents)},
              {"protocol", to_string(c.protocol)},
              {"threshold", threshold_to_json(c.threshold)},
              {"delay", c.delay},
              {"policy", to_string(c.policy)},
              {"alpha", c.alpha},
              {"seed", c.seed}};
}

SimConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    SimConfig c;
    c.name = get_or<std::string>(j, "name", c.name);
    c.sweep_label = get_or<std::string>(j, "sweep", "");
    if (j.contains("instance")) c.instance = instance_from_json(j["instance"]);
    c.horizon = require(j, "horizon").get<Slot>();
    for (const auto& o : require(j, "agents")) {
      AgentSpec a;
      a.label = get_or<std::string>(o, "label", a.label);
      a.schedule = schedule_from_json(require(o, "schedule"));
      if (o.contains("presence")) a.presence = presence_from_json(o["presence"]);
      if (o.contains("arms")) a.arms = o["arms"].get<std::vector<ArmId>>();
      c.agents.push_back(std::move(a));
    }
    c.protocol = parse_protocol(get_or<std::string>(j, "protocol", "odc"));
    if (j.contains("threshold")) c.threshold = threshold_from_json(j["threshold"]);
    c.delay = get_or<Slot>(j, "delay", 0);
    c.policy = parse_policy(get_or<std::string>(j, "policy", "ucb"));
    c.alpha = get_or<double>(j, "alpha", c.alpha);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    validate(c);
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

bool same_config(const SimConfig& a, const SimConfig& b) { return config_to_json(a) == config_to_json(b); }

SpeedSplit solve_speed_split(std::size_t agents, double p_fast, double p_slow, double target_mean) {
  // Work in units of 1e-9 so ties are decided exactly.
  const auto units = [](double v) { return std::llround(v * 1e9); };
  const long long pf = units(p_fast);
  const long long ps = units(p_slow);
  const long long target = units(target_mean) * static_cast<long long>(agents);
  SpeedSplit best;
  long long best_err = -1;
  for (std::size_t nf = 0; nf <= agents; ++nf) {
    const auto ns = agents - nf;
    const long long total = pf * static_cast<long long>(nf) + ps * static_cast<long long>(ns);
    const long long err = total > target ? total - target : target - total;
    if (best_err < 0 || err < best_err) {
      best_err = err;
      best = {nf, ns, (static_cast<double>(nf) * p_fast + static_cast<double>(ns) * p_slow) /
                          static_cast<double>(agents)};
    }
  }
  return best;
}

std::string config_name(const std::string& preset, const std::string& sweep, const SimConfig& c) {
  std::string name = preset;
  if (!sweep.empty()) name += "/" + sweep;
  name += "/" + to_string(c.policy) + "-" + to_string(c.protocol) + "/" + describe(c.threshold);
  if (c.delay > 0) name += "/d" + std::to_string(c.delay);
  return name;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"exp1", "exp2", "exp3",  "exp4", "exp5", "exp6a",
                                              "exp6b", "exp7", "fig1a", "fig1b", "sync"};
  return names;
}

Preset resolve_preset(std::string_view name, const PresetOverrides& ov) {
  Preset preset;
  preset.name = std::string(name);
  Builder b{preset.name, {}};
  const std::vector<ThresholdSchedule> both{ConstantThreshold{1}, GeometricThreshold{2}};
  const std::vector<ThresholdSchedule> unit{ConstantThreshold{1}};
  const std::vector<ThresholdSchedule> doubling{GeometricThreshold{2}};

  if (name == "exp1") {
    Json splits = Json::array();
    for (int ratio = 10; ratio <= 30; ratio += 5) {
      const double p_slow = 0.01;
      const double p_fast = p_slow * ratio;
      const auto split = solve_speed_split(40, p_fast, p_slow, 0.085);
      std::vector<AgentSpec> agents;
      add_agents(agents, split.fast, "fast", BernoulliRate{p_fast});
      add_agents(agents, split.slow, "slow", BernoulliRate{p_slow});
      b.add("ratio=" + std::to_string(ratio), agents, kDefaultHorizon, all_combos(), both);
      splits.push_back({{"ratio", ratio},
                        {"p_fast", p_fast},
                        {"p_slow", p_slow},
                        {"fast", split.fast},
                        {"slow", split.slow},
                        {"achieved_mean", split.mean}});
    }
    preset.notes["speed_splits"] = splits;
  } else if (name == "exp2") {
    Json probs = Json::array();
    for (std::size_t slow = 5; slow <= 30; slow += 5) {
      const double p_slow = 1.0 / static_cast<double>(slow);
      std::vector<AgentSpec> agents;
      add_agents(agents, 5, "fast", BernoulliRate{0.8});
      add_agents(agents, slow, "slow", BernoulliRate{p_slow});
      b.add("slow=" + std::to_string(slow), agents, kDefaultHorizon, all_combos(), both);
      probs.push_back({{"slow", slow}, {"p_slow", p_slow}});
    }
    preset.notes["slow_probabilities"] = probs;
  } else if (name == "exp3") {
    std::vector<AgentSpec> agents;
    add_agents(agents, 1, "fast", BernoulliRate{1.0});
    add_agents(agents, 9, "slow", BernoulliRate{0.001});
    b.add("", agents, kDefaultHorizon, all_combos(), doubling);
  } else if (name == "exp4") {
    std::vector<AgentSpec> agents;
    add_agents(agents, 1, "fast", BernoulliRate{1.0});
    add_agents(agents, 9, "slow", HalvingRate{0.1});
    b.add("", agents, 8000000, {{PolicyKind::kUcb, ProtocolKind::kIbc}, {PolicyKind::kUcb, ProtocolKind::kOdc}},
          doubling);
  } else if (name == "exp5") {
    std::vector<AgentSpec> agents;
    add_agents(agents, 5, "slow", BernoulliRate{0.2});
    add_agents(agents, 5, "fast", GeometricOnOff{0.8, 0.01, true});
    b.add("", agents, kDefaultHorizon, all_combos(), unit);
  } else if (name == "exp6a" || name == "exp6b") {
    const Slot late = 40000;
    const bool fast_late = name == "exp6a";
    std::vector<AgentSpec> agents;
    add_agents(agents, 5, "slow", BernoulliRate{0.1}, fast_late ? 1 : late);
    add_agents(agents, 5, "fast", BernoulliRate{0.7}, fast_late ? late : 1);
    b.add("", agents, kDefaultHorizon, all_combos(), unit);
  } else if (name == "exp7") {
    std::vector<AgentSpec> agents;
    for (int j = 1; j <= 10; ++j) agents.push_back(agent("agent", SinePhase{j / 5.0, 30.0, false}));
    b.add("", agents, kDefaultHorizon, all_combos(), unit);
  } else if (name == "fig1a" || name == "fig1b") {
    std::vector<AgentSpec> agents{agent("fast", ExplicitSlots{{1, 2, 3, 5, 6, 7, 10}}),
                                  agent("slow", ExplicitSlots{{4, 8, 9}})};
    b.add("", agents, 10, {{PolicyKind::kUcb, ProtocolKind::kOdc}},
          name == "fig1a" ? unit : doubling);
    preset.trials = 1;
  } else if (name == "sync") {
    std::vector<AgentSpec> agents;
    add_agents(agents, 5, "agent", BernoulliRate{1.0});
    b.add("", agents, 10000, {{PolicyKind::kAae, ProtocolKind::kOdc}},
          {GeometricThreshold{2}, CandidateScaledDoubling{}});
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  if (name != "fig1a" && name != "fig1b") preset.trials = kDefaultTrials;
  if (ov.trials) {
    if (*ov.trials < 1) throw ConfigError("trials must be >= 1");
    preset.trials = *ov.trials;
  }

  const std::uint64_t seed = ov.seed.value_or(1);
  std::set<std::string> seen;
  for (auto& c : b.configs) {
    if (ov.protocol && c.protocol != *ov.protocol) continue;
    if (ov.policy && c.policy != *ov.policy) continue;
    if (ov.threshold) c.threshold = *ov.threshold;
    if (ov.delay) c.delay = *ov.delay;
    if (ov.horizon) c.horizon = *ov.horizon;
    c.seed = seed;
    c.name = config_name(preset.name, c.sweep_label, c);
    if (!seen.insert(c.name).second) continue;
    validate(c);
    preset.configs.push_back(std::move(c));
  }
  if (preset.configs.empty()) throw ConfigError("overrides leave no configuration in preset " + preset.name);
  preset.notes["seed"] = seed;
  return preset;
}

}  // namespace odc
