#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "odc/bandit.hpp"
#include "odc/messaging.hpp"
#include "odc/policy.hpp"
#include "odc/protocol.hpp"
#include "odc/schedule.hpp"
#include "odc/types.hpp"

namespace odc {

/// Means given explicitly.
struct ExplicitMeans {
  std::vector<double> means;
  bool operator==(const ExplicitMeans&) const = default;
};
/// K means drawn uniformly from [low, high] with the config seed.
struct UniformMeans {
  std::size_t k = 16;
  double low = 0.05;
  double high = 0.95;
  bool operator==(const UniformMeans&) const = default;
};
using InstanceSource = std::variant<ExplicitMeans, UniformMeans>;

struct AgentSpec {
  ActivationSchedule schedule = BernoulliRate{1.0};
  std::vector<PresenceWindow> presence{PresenceWindow{}};
  std::string label = "agent";
  /// Local arm set K_j; empty means every arm (homogeneous).
  std::vector<ArmId> arms;
};

struct LogOptions {
  bool record_messages = false;  // per-message records and protocol events
  bool record_counters = false;  // c / f history per ordered pair (bound instrumentation)
};

struct SimConfig {
  std::string name = "run";
  std::string sweep_label;  // free-form tag of the sweep point
  InstanceSource instance = UniformMeans{};
  Slot horizon = 1000;
  std::vector<AgentSpec> agents;
  ProtocolKind protocol = ProtocolKind::kOdc;
  ThresholdSchedule threshold = ConstantThreshold{1};
  Slot delay = 0;
  PolicyKind policy = PolicyKind::kUcb;
  double alpha = 3.0;
  std::uint64_t seed = 1;
  LogOptions log;

  std::size_t num_agents() const { return agents.size(); }
  bool heterogeneous() const;
};

/// Throws ConfigError when the config violates a model invariant.
void validate(const SimConfig& config);

/// Instance used by every trial of `config` (drawn from the config seed).
BanditInstance resolve_instance(const SimConfig& config);

/// Local arm sets, one per agent, with empty specs expanded to all arms.
std::vector<std::vector<ArmId>> local_arm_sets(const SimConfig& config, std::size_t num_arms);

struct PullRecord {
  Slot slot = 0;
  AgentId agent = 0;
  ArmId arm = 0;
  std::uint8_t reward = 0;
  bool operator==(const PullRecord&) const = default;
};

struct MessageRecord {
  Slot send_slot = 0;
  Slot deliver_slot = 0;
  AgentId from = 0;
  AgentId to = 0;
  MessageKind kind = MessageKind::kData;
  std::uint32_t arm_count = 0;   // data: arms with non-zero tallies; elim: 1
  std::uint64_t obs_count = 0;   // data: total observations
  std::uint64_t bits = 0;        // data: encoded size
  ArmId arm = 0;                 // elim: eliminated arm
  std::uint64_t counter_after = 0;    // data: c after the send
  std::uint64_t threshold_after = 0;  // data: f(c) after the send
  bool reply = false;            // data sent from message processing
  bool delivered = false;
  Slot delivered_slot = 0;
  bool operator==(const MessageRecord&) const = default;
};

/// Exchange demand raised on receipt without a reply.
struct DemandEvent {
  Slot slot = 0;
  AgentId agent = 0;
  AgentId peer = 0;
  std::uint64_t buffered = 0;
  std::uint64_t threshold = 0;
  bool operator==(const DemandEvent&) const = default;
};

struct EliminationEvent {
  Slot slot = 0;
  AgentId agent = 0;
  ArmId arm = 0;
  bool operator==(const EliminationEvent&) const = default;
};

struct PresenceEvent {
  Slot slot = 0;
  AgentId agent = 0;
  bool join = false;
  bool operator==(const PresenceEvent&) const = default;
};

/// Value of c and cached f(c) for one ordered pair from `slot` onwards.
struct CounterChange {
  Slot slot = 0;
  std::uint64_t counter = 1;
  std::uint64_t threshold = 1;
  bool operator==(const CounterChange&) const = default;
};

struct AgentSnapshot {
  std::vector<ArmStats> stats;  // by ArmId
  std::vector<ArmId> candidates;
  bool operator==(const AgentSnapshot&) const = default;
};

struct TrialLog {
  std::uint64_t trial = 0;
  Slot horizon = 0;
  std::size_t num_agents = 0;
  std::size_t num_arms = 0;
  Slot delay = 0;
  std::vector<PullRecord> pulls;       // slot order, then agent order
  std::vector<std::uint64_t> decisions;  // N_j
  std::vector<std::uint64_t> data_sent;     // ordered pair (from * M + to)
  std::vector<std::uint64_t> control_sent;  // ordered pair
  std::vector<std::pair<Slot, std::uint64_t>> data_cumulative;  // (slot, C so far) at changes
  std::vector<MessageRecord> messages;  // if record_messages
  std::vector<DemandEvent> demands;     // if record_messages
  std::vector<EliminationEvent> eliminations;
  std::vector<PresenceEvent> presence;
  std::vector<std::vector<CounterChange>> counters;  // if record_counters; pair index
  std::vector<AgentSnapshot> final_state;
  std::uint64_t undelivered = 0;
  std::uint64_t max_cascade_depth = 0;
  bool counters_recorded = false;

  std::size_t pair_index(AgentId from, AgentId to) const { return from * num_agents + to; }
  std::uint64_t total_data() const;
  std::uint64_t total_control() const;

  bool operator==(const TrialLog&) const = default;
};

/// Runs one trial of `config` using the trial's independent RNG streams.
TrialLog run_trial(const SimConfig& config, std::uint64_t trial);

/// Runs `trials` trials on up to `parallelism` threads. Trial i always uses
/// stream index i, so results do not depend on the thread count.
std::vector<TrialLog> run_experiment(const SimConfig& config, std::uint64_t trials,
                                     unsigned parallelism = 1);

}  // namespace odc
