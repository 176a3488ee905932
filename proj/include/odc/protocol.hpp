#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "odc/messaging.hpp"
#include "odc/types.hpp"

namespace odc {

/// f(c) = a
struct ConstantThreshold {
  std::uint64_t a = 1;
  bool operator==(const ConstantThreshold&) const = default;
};
/// f(c) = a^(c-1), a > 1
struct GeometricThreshold {
  std::uint64_t a = 2;
  bool operator==(const GeometricThreshold&) const = default;
};
/// f(c) = |C| * 2^(c-1), with |C| the sender's current candidate-set size
struct CandidateScaledDoubling {
  bool operator==(const CandidateScaledDoubling&) const = default;
};

using ThresholdSchedule = std::variant<ConstantThreshold, GeometricThreshold, CandidateScaledDoubling>;

void validate_threshold(const ThresholdSchedule& schedule);
std::string describe(const ThresholdSchedule& schedule);

/// Buffer threshold for the c-th message on a pair. Saturates at UINT64_MAX.
std::uint64_t threshold_value(const ThresholdSchedule& schedule, std::uint64_t c,
                              std::uint64_t candidate_size = 1);

enum class ProtocolKind : std::uint8_t { kOdc, kIbc };

/// Sender-side state of one ordered pair (self -> peer).
struct PeerCommState {
  AgentId peer = 0;
  bool exchange_demand = true;  // E
  bool peer_online = true;      // cleared by a Depart notice, set by Join
  std::vector<bool> shared;     // by ArmId: arm in K_self ∩ K_peer
  std::vector<std::uint64_t> buffer_counts;  // b_n, by ArmId
  std::vector<std::uint64_t> buffer_sums;    // b_mu, by ArmId
  boost::container::small_vector<ArmId, 8> touched;  // arms with b_n > 0
  std::uint64_t buffered_total = 0;  // Σ b_n over shared arms
  std::uint64_t comm_counter = 1;    // c
  std::uint64_t threshold = 1;       // cached f(c)

  bool shares(ArmId arm) const { return arm < shared.size() && shared[arm]; }
};

/// Fresh pair state: E = true, empty buffers, c = 1, f_c = f(1).
PeerCommState make_peer_state(AgentId peer, std::vector<bool> shared,
                              const ThresholdSchedule& schedule,
                              std::uint64_t candidate_size = 1);

/// Re-evaluates the cached threshold (needed when |C| changes under
/// CandidateScaledDoubling).
void refresh_threshold(PeerCommState& state, const ThresholdSchedule& schedule,
                       std::uint64_t candidate_size);

/// Adds one observation to the buffer of every peer that shares the arm.
void record_observation(std::span<PeerCommState> peers, ArmId arm, int reward);
/// Single-peer variant (used when per-pair gating applies).
void record_observation(PeerCommState& peer, ArmId arm, int reward);

/// ODC send check after a pull: sends iff E and buffered_total >= f(c).
std::optional<DataPayload> odc_try_send_on_pull(PeerCommState& state,
                                                const ThresholdSchedule& schedule,
                                                std::uint64_t candidate_size = 1);

/// ODC reaction to a data message from the peer (already merged by the
/// caller): reply if the buffer meets the threshold, otherwise raise E.
std::optional<DataPayload> odc_on_receive(PeerCommState& state, const ThresholdSchedule& schedule,
                                          std::uint64_t candidate_size = 1);

/// IBC send check: threshold only, no demand gating.
std::optional<DataPayload> ibc_try_send(PeerCommState& state, const ThresholdSchedule& schedule,
                                        std::uint64_t candidate_size = 1);

enum class PresenceNotice : std::uint8_t { kJoin, kDepart };
void handle_presence_notice(PeerCommState& state, PresenceNotice notice);

}  // namespace odc
