#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "odc/simulator.hpp"

namespace odc {

using Json = nlohmann::json;

ThresholdSchedule parse_threshold(std::string_view text);
ProtocolKind parse_protocol(std::string_view text);
PolicyKind parse_policy(std::string_view text);
std::string to_string(ProtocolKind kind);
std::string to_string(PolicyKind kind);

Json schedule_to_json(const ActivationSchedule& s);
ActivationSchedule schedule_from_json(const Json& j);
Json threshold_to_json(const ThresholdSchedule& s);
ThresholdSchedule threshold_from_json(const Json& j);

/// Logging options are run options, not part of the serialized config.
Json config_to_json(const SimConfig& config);
SimConfig config_from_json(const Json& j);

/// Equality over every serialized field.
bool same_config(const SimConfig& a, const SimConfig& b);

struct PresetOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<Slot> horizon;
  std::optional<ProtocolKind> protocol;  // keeps only matching configs
  std::optional<PolicyKind> policy;      // keeps only matching configs
  std::optional<ThresholdSchedule> threshold;
  std::optional<Slot> delay;
};

struct Preset {
  std::string name;
  std::uint64_t trials = 30;
  std::vector<SimConfig> configs;
  Json notes = Json::object();
};

const std::vector<std::string>& preset_names();

/// Expands a named preset into concrete configs. Throws ConfigError for an
/// unknown name or overrides that leave no config / violate invariants.
Preset resolve_preset(std::string_view name, const PresetOverrides& overrides = {});

struct SpeedSplit {
  std::size_t fast = 0;
  std::size_t slow = 0;
  double mean = 0.0;
};

/// Integer fast/slow split of `agents` agents whose mean sampling probability
/// is closest to `target_mean`; ties go to fewer fast agents.
SpeedSplit solve_speed_split(std::size_t agents, double p_fast, double p_slow, double target_mean);

/// Canonical config name from its parts: preset/sweep/policy-protocol/threshold.
std::string config_name(const std::string& preset, const std::string& sweep, const SimConfig& c);

}  // namespace odc
