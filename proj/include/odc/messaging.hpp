#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "odc/types.hpp"

namespace odc {

/// Buffered observations of one arm: how many pulls and how many of them paid 1.
struct ArmTally {
  ArmId arm = 0;
  std::uint64_t count = 0;
  std::uint64_t reward_sum = 0;

  bool operator==(const ArmTally&) const = default;
};

/// Observation-sharing message. Arms absent from `tallies` carry (0, 0).
struct DataPayload {
  boost::container::small_vector<ArmTally, 4> tallies;  // ascending arm order

  std::uint64_t total_count() const;
  /// Throws ProtocolError if any reward_sum exceeds its count or the payload is empty.
  void validate() const;

  bool operator==(const DataPayload&) const = default;
};

struct EliminationNotice {
  ArmId arm = 0;
  bool operator==(const EliminationNotice&) const = default;
};
struct JoinNotice {
  bool operator==(const JoinNotice&) const = default;
};
struct DepartNotice {
  bool operator==(const DepartNotice&) const = default;
};

using MessagePayload = std::variant<DataPayload, EliminationNotice, JoinNotice, DepartNotice>;

enum class MessageKind : std::uint8_t { kData, kElimination, kJoin, kDepart };

MessageKind kind_of(const MessagePayload& payload);
std::string_view to_string(MessageKind kind);

/// Size of a data message when encoded as `format_arms` (count, sum) tuples,
/// each field needing ceil(log2(total + 1)) bits.
std::uint64_t message_bits(std::uint64_t format_arms, std::uint64_t total_count);

struct Envelope {
  AgentId from = 0;
  AgentId to = 0;
  MessagePayload payload;
  Slot send_slot = 0;
  Slot deliver_slot = 0;
  std::uint64_t seq = 0;  // per-sender, strictly increasing
};

/// Pending messages keyed by delivery slot. Drain order within and across
/// slots is (deliver_slot, send_slot, from, seq).
class DeliveryQueue {
 public:
  /// Stores the envelope with deliver_slot = send_slot + delay.
  /// Throws ProtocolError on a self-addressed message.
  const Envelope& enqueue(AgentId from, AgentId to, MessagePayload payload, Slot send_slot,
                          Slot delay);

  /// Puts back an envelope that was drained but could not be handled yet
  /// (recipient offline). Keeps its original fields.
  void requeue(Envelope envelope);

  /// Removes and returns every envelope with deliver_slot <= t, sorted.
  std::vector<Envelope> drain_due(Slot t);

  bool empty() const { return pending_ == 0; }
  std::size_t pending() const { return pending_; }
  std::uint64_t enqueued_total() const { return enqueued_; }
  std::uint64_t requeued_total() const { return requeued_; }
  std::uint64_t drained_total() const { return drained_; }

  /// Remaining envelopes in drain order (does not modify the queue).
  std::vector<Envelope> snapshot() const;

 private:
  std::map<Slot, std::vector<Envelope>> buckets_;
  std::vector<std::uint64_t> next_seq_;  // by sender
  std::size_t pending_ = 0;
  std::uint64_t enqueued_ = 0;
  std::uint64_t requeued_ = 0;
  std::uint64_t drained_ = 0;
};

}  // namespace odc
