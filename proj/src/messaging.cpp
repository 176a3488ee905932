#include "odc/messaging.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace odc {

std::uint64_t DataPayload::total_count() const {
  std::uint64_t total = 0;
  for (const auto& t : tallies) total += t.count;
  return total;
}

void DataPayload::validate() const {
  if (total_count() == 0) throw ProtocolError("empty data message");
  for (const auto& t : tallies) {
    if (t.reward_sum > t.count) {
      throw ProtocolError("arm " + std::to_string(t.arm) + ": reward sum exceeds count");
    }
  }
}

MessageKind kind_of(const MessagePayload& payload) {
  return static_cast<MessageKind>(payload.index());
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kData: return "data";
    case MessageKind::kElimination: return "elim";
    case MessageKind::kJoin: return "join";
    case MessageKind::kDepart: return "depart";
  }
  return "?";
}

std::uint64_t message_bits(std::uint64_t format_arms, std::uint64_t total_count) {
  // ceil(log2(n + 1)) == bit width of n
  const auto width = static_cast<std::uint64_t>(std::bit_width(total_count));
  return format_arms * 2 * width;
}

const Envelope& DeliveryQueue::enqueue(AgentId from, AgentId to, MessagePayload payload,
                                       Slot send_slot, Slot delay) {
  if (from == to) throw ProtocolError("self-addressed message from agent " + std::to_string(from));
  if (next_seq_.size() <= from) next_seq_.resize(from + 1, 0);
  Envelope env{from, to, std::move(payload), send_slot, send_slot + delay, next_seq_[from]++};
  auto& bucket = buckets_[env.deliver_slot];
  bucket.push_back(std::move(env));
  ++pending_;
  ++enqueued_;
  return bucket.back();
}

void DeliveryQueue::requeue(Envelope envelope) {
  buckets_[envelope.deliver_slot].push_back(std::move(envelope));
  ++pending_;
  ++requeued_;
}

namespace {

bool drain_before(const Envelope& a, const Envelope& b) {
  if (a.deliver_slot != b.deliver_slot) return a.deliver_slot < b.deliver_slot;
  if (a.send_slot != b.send_slot) return a.send_slot < b.send_slot;
  if (a.from != b.from) return a.from < b.from;
  return a.seq < b.seq;
}

}  // namespace

std::vector<Envelope> DeliveryQueue::drain_due(Slot t) {
  std::vector<Envelope> out;
  auto it = buckets_.begin();
  while (it != buckets_.end() && it->first <= t) {
    if (out.empty()) {
      out = std::move(it->second);
    } else {
      std::move(it->second.begin(), it->second.end(), std::back_inserter(out));
    }
    it = buckets_.erase(it);
  }
  std::stable_sort(out.begin(), out.end(), drain_before);
  pending_ -= out.size();
  drained_ += out.size();
  return out;
}

std::vector<Envelope> DeliveryQueue::snapshot() const {
  std::vector<Envelope> out;
  for (const auto& [slot, bucket] : buckets_) out.insert(out.end(), bucket.begin(), bucket.end());
  std::stable_sort(out.begin(), out.end(), drain_before);
  return out;
}

}  // namespace odc
