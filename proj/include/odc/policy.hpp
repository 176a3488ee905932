#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "odc/messaging.hpp"
#include "odc/types.hpp"

namespace odc {

enum class PolicyKind : std::uint8_t { kUcb, kAae };

/// Exact per-arm statistics; the empirical mean is reward_sum / count.
struct ArmStats {
  std::uint64_t count = 0;
  std::uint64_t reward_sum = 0;

  double mean() const {
    return count == 0 ? 0.0 : static_cast<double>(reward_sum) / static_cast<double>(count);
  }
  bool operator==(const ArmStats&) const = default;
};

class PolicyState {
 public:
  /// `local_arms` must be non-empty, sorted and below `num_arms`.
  PolicyState(std::size_t num_arms, std::vector<ArmId> local_arms, double alpha);
  /// Homogeneous convenience: every arm is local.
  PolicyState(std::size_t num_arms, double alpha);

  std::span<const ArmId> local_arms() const { return local_arms_; }
  bool is_local(ArmId arm) const { return arm < is_local_.size() && is_local_[arm]; }
  std::size_t num_arms() const { return stats_.size(); }

  const ArmStats& stats(ArmId arm) const { return stats_.at(arm); }
  std::uint64_t n_hat(ArmId arm) const { return stats_.at(arm).count; }
  double mu_hat(ArmId arm) const { return stats_.at(arm).mean(); }
  std::uint64_t own_pulls(ArmId arm) const { return own_pulls_.at(arm); }
  std::uint64_t n_decisions() const { return n_decisions_; }
  double alpha() const { return alpha_; }

  /// One decision: own pull of `arm` with `reward`.
  void record_pull(ArmId arm, int reward);
  /// Adds received tallies. Throws ProtocolError on reward_sum > count or a
  /// non-local arm.
  void merge(const DataPayload& data);

  /// Upper confidence index mu_hat + CI; +inf for arms never observed and
  /// before the agent's first decision.
  double ucb_index(ArmId arm) const;
  /// Confidence half-width; +inf when n_hat = 0 or n_decisions = 0.
  double ci(ArmId arm) const;

 private:
  std::vector<ArmId> local_arms_;
  std::vector<bool> is_local_;
  std::vector<ArmStats> stats_;
  std::vector<std::uint64_t> own_pulls_;
  std::uint64_t n_decisions_ = 0;
  double alpha_;
};

/// sqrt(alpha * ln(n_decisions) / (2 * n_hat)), i.e. the width with delta = 1/n_j.
double ci_width(std::uint64_t n_hat, std::uint64_t n_decisions, double alpha);

/// argmax of mu_hat + CI over local arms; unobserved arms first; ties to the lowest id.
ArmId ucb_select(const PolicyState& state);

/// Free-function form of PolicyState::merge.
void merge_observations(PolicyState& state, const DataPayload& data);

/// Active arm elimination state: shared statistics plus the candidate set.
class AaeState {
 public:
  explicit AaeState(PolicyState base);

  PolicyState& base() { return base_; }
  const PolicyState& base() const { return base_; }

  std::span<const ArmId> candidates() const { return candidates_; }
  std::size_t candidate_size() const { return candidates_.size(); }
  bool is_candidate(ArmId arm) const;

  /// Starts tracking a peer's candidate set (heterogeneous mode).
  void track_peer(AgentId peer, std::vector<ArmId> peer_arms);
  /// Tracked size of a peer's candidate set, or 0 when the peer is unknown.
  std::size_t peer_candidate_size(AgentId peer) const;

  /// Removes `arm` if present and the set has more than one arm. Returns true
  /// if it was removed.
  bool remove_candidate(ArmId arm);
  bool remove_peer_candidate(AgentId peer, ArmId arm);

 private:
  PolicyState base_;
  std::vector<ArmId> candidates_;  // sorted
  std::map<AgentId, std::vector<ArmId>> peer_candidates_;
};

/// Removes every candidate whose interval lies strictly below another local
/// arm's interval, scanning in ascending arm order while more than one arm
/// remains. Returns the removed arms.
std::vector<ArmId> aae_eliminate(AaeState& state);

/// Candidate with the fewest total observations n_hat; ties to the lowest id.
ArmId aae_select(const AaeState& state);

bool aae_should_communicate(const AaeState& state, AgentId peer, bool hetero);

void process_elimination_notice(AaeState& state, ArmId arm, AgentId sender, bool hetero);

}  // namespace odc
