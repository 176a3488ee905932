#include "odc/protocol.hpp"

#include <algorithm>
#include <limits>

namespace odc {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t x, std::uint64_t y) {
  if (x != 0 && y > kSaturated / x) return kSaturated;
  return x * y;
}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t result = 1;
  while (exp > 0) {
    if (exp & 1U) result = saturating_mul(result, base);
    exp >>= 1U;
    if (exp > 0) base = saturating_mul(base, base);
  }
  return result;
}

DataPayload flush(PeerCommState& state, const ThresholdSchedule& schedule,
                  std::uint64_t candidate_size) {
  DataPayload payload;
  std::sort(state.touched.begin(), state.touched.end());
  payload.tallies.reserve(state.touched.size());
  for (ArmId arm : state.touched) {
    payload.tallies.push_back({arm, state.buffer_counts[arm], state.buffer_sums[arm]});
    state.buffer_counts[arm] = 0;
    state.buffer_sums[arm] = 0;
  }
  state.touched.clear();
  state.buffered_total = 0;
  ++state.comm_counter;
  state.threshold = threshold_value(schedule, state.comm_counter, candidate_size);
  return payload;
}

bool meets_threshold(const PeerCommState& state) {
  return state.buffered_total > 0 && state.buffered_total >= state.threshold;
}

}  // namespace

void validate_threshold(const ThresholdSchedule& schedule) {
  if (const auto* c = std::get_if<ConstantThreshold>(&schedule); c && c->a < 1) {
    throw ConfigError("constant threshold needs a >= 1");
  }
  if (const auto* g = std::get_if<GeometricThreshold>(&schedule); g && g->a < 2) {
    throw ConfigError("geometric threshold needs a > 1");
  }
}

std::string describe(const ThresholdSchedule& schedule) {
  if (const auto* c = std::get_if<ConstantThreshold>(&schedule)) {
    return "constant:" + std::to_string(c->a);
  }
  if (const auto* g = std::get_if<GeometricThreshold>(&schedule)) {
    return "geometric:" + std::to_string(g->a);
  }
  return "candidate-doubling";
}

std::uint64_t threshold_value(const ThresholdSchedule& schedule, std::uint64_t c,
                              std::uint64_t candidate_size) {
  if (c < 1) throw InputError("communication counter must be >= 1");
  if (const auto* k = std::get_if<ConstantThreshold>(&schedule)) return k->a;
  if (const auto* g = std::get_if<GeometricThreshold>(&schedule)) return saturating_pow(g->a, c - 1);
  const std::uint64_t size = std::max<std::uint64_t>(candidate_size, 1);
  const std::uint64_t doubling = c - 1 >= 64 ? kSaturated : (std::uint64_t{1} << (c - 1));
  return saturating_mul(size, doubling);
}

PeerCommState make_peer_state(AgentId peer, std::vector<bool> shared,
                              const ThresholdSchedule& schedule, std::uint64_t candidate_size) {
  PeerCommState s;
  s.peer = peer;
  s.buffer_counts.assign(shared.size(), 0);
  s.buffer_sums.assign(shared.size(), 0);
  s.shared = std::move(shared);
  s.threshold = threshold_value(schedule, 1, candidate_size);
  return s;
}

void refresh_threshold(PeerCommState& state, const ThresholdSchedule& schedule,
                       std::uint64_t candidate_size) {
  state.threshold = threshold_value(schedule, state.comm_counter, candidate_size);
}

void record_observation(PeerCommState& peer, ArmId arm, int reward) {
  if (reward != 0 && reward != 1) throw InputError("reward must be 0 or 1");
  if (!peer.shares(arm)) return;
  if (peer.buffer_counts[arm] == 0) peer.touched.push_back(arm);
  peer.buffer_counts[arm] += 1;
  peer.buffer_sums[arm] += static_cast<std::uint64_t>(reward);
  peer.buffered_total += 1;
}

void record_observation(std::span<PeerCommState> peers, ArmId arm, int reward) {
  for (auto& p : peers) record_observation(p, arm, reward);
}

std::optional<DataPayload> odc_try_send_on_pull(PeerCommState& state,
                                                const ThresholdSchedule& schedule,
                                                std::uint64_t candidate_size) {
  if (!state.exchange_demand || !state.peer_online || !meets_threshold(state)) return std::nullopt;
  state.exchange_demand = false;
  return flush(state, schedule, candidate_size);
}

std::optional<DataPayload> odc_on_receive(PeerCommState& state, const ThresholdSchedule& schedule,
                                          std::uint64_t candidate_size) {
  if (state.peer_online && meets_threshold(state)) {
    state.exchange_demand = false;
    return flush(state, schedule, candidate_size);
  }
  state.exchange_demand = true;
  return std::nullopt;
}

std::optional<DataPayload> ibc_try_send(PeerCommState& state, const ThresholdSchedule& schedule,
                                        std::uint64_t candidate_size) {
  if (!state.peer_online || !meets_threshold(state)) return std::nullopt;
  return flush(state, schedule, candidate_size);
}

void handle_presence_notice(PeerCommState& state, PresenceNotice notice) {
  switch (notice) {
    case PresenceNotice::kDepart:
      state.exchange_demand = false;
      state.peer_online = false;
      break;
    case PresenceNotice::kJoin:
      state.exchange_demand = true;
      state.peer_online = true;
      break;
  }
}

}  // namespace odc
