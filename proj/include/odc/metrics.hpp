#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odc/bandit.hpp"
#include "odc/policy.hpp"
#include "odc/protocol.hpp"
#include "odc/simulator.hpp"

namespace odc {

struct RegretSummary {
  std::vector<double> per_agent_pseudo;
  std::vector<double> per_agent_realized;
  double group_pseudo = 0.0;
  double group_realized = 0.0;
  /// (slot, cumulative group pseudo-regret) after every slot with a pull.
  std::vector<std::pair<Slot, double>> cumulative;
};

/// Pseudo-regret sums the gap of every pulled arm relative to the agent's
/// (local) optimal arm; realized regret is mu(i*_j) N_j minus collected reward.
RegretSummary group_regret(const TrialLog& log, const BanditInstance& instance,
                           const std::vector<std::vector<ArmId>>* local_sets = nullptr);

/// Exact IBC message count with unit thresholds: Σ_j (M-1) N_j.
std::uint64_t ibc_comm_exact(std::span<const std::uint64_t> decisions);

/// Largest C with f(1)+...+f(C) <= N_j (0 if f(1) > N_j). Candidate-scaled
/// thresholds are evaluated with |C| = 1, the smallest admissible value.
std::uint64_t c_j_ucb(std::uint64_t n_j, const ThresholdSchedule& f);

/// Exploration budget of an AAE agent:
/// min{2K + Σ_i 8 alpha ln N_j / max(gap_i^2, gap_min^2), N_j}.
double aae_budget(std::uint64_t n_j, std::size_t k, double alpha, std::span<const double> gaps);

/// Largest C whose partial threshold sum fits in aae_budget(...).
std::uint64_t c_j_aae(std::uint64_t n_j, const ThresholdSchedule& f, std::size_t k, double alpha,
                      std::span<const double> gaps);

/// Σ over ordered pairs j != j' of (min{C_j, C_j'} + 1). With `shares`
/// (row-major M x M), only pairs that share an arm are counted.
std::uint64_t comm_bound(std::span<const std::uint64_t> c_values,
                         const std::vector<bool>* shares = nullptr);

/// Σ_{i: gap_i > 0} ln(N) / gap_i.
double regret_lower_bound(double n, std::span<const double> gaps);

/// First slot at which the cumulative number of pulls of `arm` (all agents)
/// strictly exceeds `budget`.
std::optional<Slot> compute_tau(const TrialLog& log, ArmId arm, double budget);

/// Threshold f(c) cached on pair from -> to at the end of slot t.
std::uint64_t threshold_at(const TrialLog& log, AgentId from, AgentId to, Slot t);

struct ArmBoundTerm {
  ArmId arm = 0;
  double gap = 0.0;       // Δ_i, or Δ̃_i in heterogeneous mode
  double budget = 0.0;    // exploration budget defining τ_i
  std::optional<Slot> tau;
  double lead = 0.0;      // c α ln N / gap
  double delay_term = 0.0;  // Σ_j F_i^j gap (or G, or hetero analogue)
};

struct RegretBoundReport {
  double bound = 0.0;
  double constant = 0.0;  // 3KM
  std::vector<ArmBoundTerm> arms;
};

struct BoundContext {
  PolicyKind policy = PolicyKind::kUcb;
  double alpha = 3.0;
  Slot delay = 0;
  /// Local arm sets for heterogeneous runs; nullptr for homogeneous.
  const std::vector<std::vector<ArmId>>* local_sets = nullptr;
};

/// Instrumented regret upper bound. Requires a log recorded with
/// LogOptions::record_counters; throws ConfigError otherwise.
RegretBoundReport regret_upper_bound(const TrialLog& log, const BanditInstance& instance,
                              const BoundContext& ctx);

/// Data messages split by unordered label pair, keyed "a-b" with a <= b.
std::map<std::string, std::uint64_t> comm_by_category(const TrialLog& log,
                                                      std::span<const std::string> labels);

struct CommBoundReport {
  std::vector<std::uint64_t> c_values;  // C_j per agent
  std::uint64_t bound = 0;
};

/// ODC communication bound from realized N_j; AAE uses the exploration budget
/// (per-agent local gaps in heterogeneous mode).
CommBoundReport odc_comm_bound(const TrialLog& log, const BanditInstance& instance,
                               const ThresholdSchedule& f, const BoundContext& ctx);

/// Everything that goes into one summary.csv row.
struct MetricsSummary {
  double group_regret = 0.0;
  double group_regret_realized = 0.0;
  std::uint64_t data_messages = 0;
  std::uint64_t control_messages = 0;
  std::uint64_t comm_fast_fast = 0;
  std::uint64_t comm_fast_slow = 0;
  std::uint64_t comm_slow_slow = 0;
  std::uint64_t n_total = 0;
  std::uint64_t bound_comm = 0;
  std::optional<double> bound_regret_upper;
  double bound_regret_lower = 0.0;
};

MetricsSummary summarize(const TrialLog& log, const SimConfig& config, const BanditInstance& instance);

}  // namespace odc
