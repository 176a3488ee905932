#include "odc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace odc {

namespace {

std::vector<ArmId> all_arms(std::size_t k) {
  std::vector<ArmId> arms(k);
  for (std::size_t i = 0; i < k; ++i) arms[i] = static_cast<ArmId>(i);
  return arms;
}

}  // namespace

PolicyState::PolicyState(std::size_t num_arms, std::vector<ArmId> local_arms, double alpha)
    : local_arms_(std::move(local_arms)),
      is_local_(num_arms, false),
      stats_(num_arms),
      own_pulls_(num_arms, 0),
      alpha_(alpha) {
  if (local_arms_.empty()) throw ConfigError("agent needs at least one local arm");
  if (!(alpha_ > 0.0)) throw ConfigError("alpha must be positive");
  for (std::size_t i = 0; i < local_arms_.size(); ++i) {
    const ArmId a = local_arms_[i];
    if (a >= num_arms) throw ConfigError("local arm " + std::to_string(a) + " out of range");
    if (i > 0 && a <= local_arms_[i - 1]) throw ConfigError("local arms must be sorted and unique");
    is_local_[a] = true;
  }
}

PolicyState::PolicyState(std::size_t num_arms, double alpha)
    : PolicyState(num_arms, all_arms(num_arms), alpha) {}

void PolicyState::record_pull(ArmId arm, int reward) {
  if (!is_local(arm)) throw ProtocolError("pull of non-local arm " + std::to_string(arm));
  auto& s = stats_[arm];
  s.count += 1;
  s.reward_sum += static_cast<std::uint64_t>(reward != 0);
  own_pulls_[arm] += 1;
  n_decisions_ += 1;
}

void PolicyState::merge(const DataPayload& data) {
  for (const auto& t : data.tallies) {
    if (t.reward_sum > t.count) {
      throw ProtocolError("arm " + std::to_string(t.arm) + ": reward sum exceeds count");
    }
    if (!is_local(t.arm)) {
      throw ProtocolError("received observations of non-local arm " + std::to_string(t.arm));
    }
  }
  for (const auto& t : data.tallies) {
    stats_[t.arm].count += t.count;
    stats_[t.arm].reward_sum += t.reward_sum;
  }
}

double ci_width(std::uint64_t n_hat, std::uint64_t n_decisions, double alpha) {
  if (n_hat == 0 || n_decisions == 0) throw InputError("ci_width needs n_hat >= 1 and n >= 1");
  return std::sqrt(alpha * std::log(static_cast<double>(n_decisions)) /
                   (2.0 * static_cast<double>(n_hat)));
}

double PolicyState::ci(ArmId arm) const {
  const auto n_hat = stats_.at(arm).count;
  if (n_hat == 0 || n_decisions_ == 0) return std::numeric_limits<double>::infinity();
  return ci_width(n_hat, n_decisions_, alpha_);
}

double PolicyState::ucb_index(ArmId arm) const {
  const auto& s = stats_.at(arm);
  if (s.count == 0 || n_decisions_ == 0) return std::numeric_limits<double>::infinity();
  return s.mean() + ci(arm);
}

ArmId ucb_select(const PolicyState& state) {
  const auto arms = state.local_arms();
  ArmId best = arms.front();
  double best_index = state.ucb_index(best);
  for (ArmId a : arms.subspan(1)) {
    const double idx = state.ucb_index(a);
    if (idx > best_index) {
      best = a;
      best_index = idx;
    }
  }
  return best;
}

void merge_observations(PolicyState& state, const DataPayload& data) { state.merge(data); }

AaeState::AaeState(PolicyState base)
    : base_(std::move(base)), candidates_(base_.local_arms().begin(), base_.local_arms().end()) {}

bool AaeState::is_candidate(ArmId arm) const {
  return std::binary_search(candidates_.begin(), candidates_.end(), arm);
}

void AaeState::track_peer(AgentId peer, std::vector<ArmId> peer_arms) {
  std::sort(peer_arms.begin(), peer_arms.end());
  peer_candidates_[peer] = std::move(peer_arms);
}

std::size_t AaeState::peer_candidate_size(AgentId peer) const {
  const auto it = peer_candidates_.find(peer);
  return it == peer_candidates_.end() ? 0 : it->second.size();
}

bool AaeState::remove_candidate(ArmId arm) {
  if (candidates_.size() <= 1) return false;
  const auto it = std::lower_bound(candidates_.begin(), candidates_.end(), arm);
  if (it == candidates_.end() || *it != arm) return false;
  candidates_.erase(it);
  return true;
}

bool AaeState::remove_peer_candidate(AgentId peer, ArmId arm) {
  const auto pit = peer_candidates_.find(peer);
  if (pit == peer_candidates_.end()) return false;
  auto& set = pit->second;
  if (set.size() <= 1) return false;
  const auto it = std::lower_bound(set.begin(), set.end(), arm);
  if (it == set.end() || *it != arm) return false;
  set.erase(it);
  return true;
}

std::vector<ArmId> aae_eliminate(AaeState& state) {
  std::vector<ArmId> removed;
  if (state.candidate_size() <= 1) return removed;
  const PolicyState& base = state.base();

  // Best lower confidence endpoint over all local arms. An arm i is dominated
  // iff its upper endpoint is below some other arm's lower endpoint, i.e.
  // below this maximum (an arm can never dominate itself).
  double best_lcb = -std::numeric_limits<double>::infinity();
  for (ArmId a : base.local_arms()) {
    if (base.n_hat(a) == 0) continue;
    best_lcb = std::max(best_lcb, base.mu_hat(a) - base.ci(a));
  }
  const std::vector<ArmId> snapshot(state.candidates().begin(), state.candidates().end());
  for (ArmId arm : snapshot) {
    if (state.candidate_size() <= 1) break;
    if (base.n_hat(arm) == 0) continue;
    if (base.mu_hat(arm) + base.ci(arm) < best_lcb && state.remove_candidate(arm)) {
      removed.push_back(arm);
    }
  }
  return removed;
}

ArmId aae_select(const AaeState& state) {
  const auto cands = state.candidates();
  ArmId best = cands.front();
  for (ArmId a : cands.subspan(1)) {
    if (state.base().n_hat(a) < state.base().n_hat(best)) best = a;
  }
  return best;
}

bool aae_should_communicate(const AaeState& state, AgentId peer, bool hetero) {
  if (state.candidate_size() > 1) return true;
  if (!hetero) return false;
  const std::size_t peer_size = state.peer_candidate_size(peer);
  // Unknown peers have not reported any elimination yet.
  return peer_size == 0 || peer_size > 1;
}

void process_elimination_notice(AaeState& state, ArmId arm, AgentId sender, bool hetero) {
  if (hetero) {
    state.remove_peer_candidate(sender, arm);
  } else {
    state.remove_candidate(arm);
  }
}

}  // namespace odc
