#include "odc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace odc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(what) + " must lie in [0,1]");
  }
}

}  // namespace

double clamp_probability(double p) {
  if (!(p > 0.0)) return 0.0;
  return p > 1.0 ? 1.0 : p;
}

void validate_windows(std::span<const PresenceWindow> windows) {
  Slot prev_end = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (w.join_slot < 1) throw ConfigError("presence window join slot must be >= 1");
    if (w.depart_slot && *w.depart_slot <= w.join_slot) {
      throw ConfigError("presence window must have join_slot < depart_slot");
    }
    if (i > 0 && w.join_slot < prev_end) {
      throw ConfigError("presence windows must be sorted and disjoint");
    }
    if (!w.depart_slot && i + 1 != windows.size()) {
      throw ConfigError("only the last presence window may be open-ended");
    }
    prev_end = w.depart_slot.value_or(0);
  }
}

void validate_schedule(const ActivationSchedule& schedule) {
  std::visit(Overloaded{
                 [](const BernoulliRate& s) { check_probability(s.p, "bernoulli p"); },
                 [](const GeometricOnOff& s) {
                   check_probability(s.p, "geometric p");
                   check_probability(s.switch_prob, "geometric switch_prob");
                 },
                 [](const SinePhase& s) {
                   if (!(s.time_scale > 0.0)) throw ConfigError("sine time_scale must be > 0");
                 },
                 [](const ExplicitSlots& s) {
                   for (std::size_t i = 0; i < s.slots.size(); ++i) {
                     if (s.slots[i] < 1) throw ConfigError("explicit slots are 1-based");
                     if (i > 0 && s.slots[i] <= s.slots[i - 1]) {
                       throw ConfigError("explicit slots must be strictly increasing");
                     }
                   }
                 },
                 [](const HalvingRate& s) { check_probability(s.p0, "halving p0"); },
             },
             schedule);
}

bool is_present(std::span<const PresenceWindow> windows, Slot t) {
  for (const auto& w : windows) {
    if (t < w.join_slot) return false;
    if (!w.depart_slot || t < *w.depart_slot) return true;
  }
  return false;
}

Activation::Activation(ActivationSchedule schedule, RngStream rng)
    : schedule_(std::move(schedule)), rng_(std::move(rng)) {
  validate_schedule(schedule_);
  if (const auto* g = std::get_if<GeometricOnOff>(&schedule_)) online_ = g->start_online;
  if (const auto* h = std::get_if<HalvingRate>(&schedule_)) halving_p_ = h->p0;
}

double Activation::current_rate(Slot t) const {
  return std::visit(
      Overloaded{
          [](const BernoulliRate& s) { return clamp_probability(s.p); },
          [this](const GeometricOnOff& s) { return online_ ? clamp_probability(s.p) : 0.0; },
          [t](const SinePhase& s) {
            const double v = std::sin(s.phase + static_cast<double>(t) / s.time_scale);
            return clamp_probability(s.use_abs ? std::fabs(v) : v);
          },
          [](const ExplicitSlots&) { return 0.0; },
          [this](const HalvingRate&) { return clamp_probability(halving_p_); },
      },
      schedule_);
}

bool Activation::is_decision_slot(Slot t) {
  if (auto* e = std::get_if<ExplicitSlots>(&schedule_)) {
    auto& slots = e->slots;
    while (explicit_cursor_ < slots.size() && slots[explicit_cursor_] < t) ++explicit_cursor_;
    return explicit_cursor_ < slots.size() && slots[explicit_cursor_] == t;
  }
  if (const auto* g = std::get_if<GeometricOnOff>(&schedule_)) {
    // Evolve the on/off chain for every slot since the last evaluation so dwell
    // times stay geometric even across absences.
    const Slot steps = t > last_evolved_ ? t - last_evolved_ : 0;
    for (Slot s = 0; s < steps; ++s) {
      if (rng_.bernoulli(g->switch_prob)) online_ = !online_;
    }
    last_evolved_ = t;
    if (!online_) return false;
    return rng_.bernoulli(g->p);
  }
  return rng_.bernoulli(current_rate(t));
}

void Activation::on_message_sent() {
  if (std::holds_alternative<HalvingRate>(schedule_)) halving_p_ *= 0.5;
}

PresenceTracker::PresenceTracker(std::vector<PresenceWindow> windows)
    : windows_(std::move(windows)) {
  validate_windows(windows_);
}

PresenceTracker::Transition PresenceTracker::advance(Slot t) {
  const bool now = is_present(windows_, t);
  if (!started_) {
    started_ = true;
    present_ = now;
    return Transition::kNone;
  }
  if (now == present_) return Transition::kNone;
  present_ = now;
  return now ? Transition::kJoin : Transition::kDepart;
}

}  // namespace odc
