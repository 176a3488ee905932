#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "odc/bandit.hpp"
#include "odc/types.hpp"

namespace odc {

/// Decides with probability p in every present slot.
struct BernoulliRate {
  double p = 1.0;
};

/// Online/offline dwell times are geometric: each slot the state toggles with
/// probability switch_prob; while online the agent decides with probability p.
struct GeometricOnOff {
  double p = 1.0;
  double switch_prob = 0.01;
  bool start_online = true;
};

/// Decision probability max(0, sin(phase + t / time_scale)), or |sin(...)| when
/// use_abs is set.
struct SinePhase {
  double phase = 0.0;
  double time_scale = 30.0;
  bool use_abs = false;
};

/// Decides exactly at the listed slots (strictly increasing).
struct ExplicitSlots {
  std::vector<Slot> slots;
};

/// Starts at p0; halved each time the agent transmits a data message.
struct HalvingRate {
  double p0 = 0.1;
};

using ActivationSchedule =
    std::variant<BernoulliRate, GeometricOnOff, SinePhase, ExplicitSlots, HalvingRate>;

/// [join_slot, depart_slot) ; an absent depart_slot means "until the horizon".
struct PresenceWindow {
  Slot join_slot = 1;
  std::optional<Slot> depart_slot;

  bool operator==(const PresenceWindow&) const = default;
};

/// Throws ConfigError unless windows are well-formed, sorted and disjoint.
void validate_windows(std::span<const PresenceWindow> windows);
/// Throws ConfigError on invalid probabilities or unsorted explicit slots.
void validate_schedule(const ActivationSchedule& schedule);

bool is_present(std::span<const PresenceWindow> windows, Slot t);

/// Evaluation probability of the schedule at slot t, clamped to [0,1]. For
/// GeometricOnOff this is the while-online probability.
double clamp_probability(double p);

/// Per-agent mutable side of an ActivationSchedule (online flag, halving
/// count, explicit cursor) plus the agent's schedule RNG stream.
class Activation {
 public:
  Activation(ActivationSchedule schedule, RngStream rng);

  /// Must be called at most once per slot, in increasing slot order, and only
  /// while the agent is present.
  bool is_decision_slot(Slot t);

  /// HalvingRate trigger: the agent transmitted one data message.
  void on_message_sent();

  const ActivationSchedule& schedule() const { return schedule_; }
  double current_rate(Slot t) const;

 private:
  ActivationSchedule schedule_;
  RngStream rng_;
  bool online_ = true;
  Slot last_evolved_ = 0;
  std::size_t explicit_cursor_ = 0;
  double halving_p_ = 1.0;
};

/// Tracks presence transitions so each join/depart is reported exactly once.
class PresenceTracker {
 public:
  enum class Transition { kNone, kJoin, kDepart };

  explicit PresenceTracker(std::vector<PresenceWindow> windows);

  /// Presence before the first slot is taken to equal presence at slot 1, so
  /// agents present from the start never emit an initial Join.
  Transition advance(Slot t);
  bool present() const { return present_; }
  std::span<const PresenceWindow> windows() const { return windows_; }

 private:
  std::vector<PresenceWindow> windows_;
  bool present_ = false;
  bool started_ = false;
};

}  // namespace odc
