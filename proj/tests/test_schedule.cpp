#include <gtest/gtest.h>

#include <cmath>

#include "odc/schedule.hpp"

namespace odc {
namespace {

RngStream stream(std::uint64_t i = 0) { return RngStream(77, {StreamPurpose::kSchedule, 0, i}); }

TEST(Presence, Windows) {
  const std::vector<PresenceWindow> always{{1, std::nullopt}};
  EXPECT_TRUE(is_present(always, 500));
  const std::vector<PresenceWindow> late{{40000, std::nullopt}};
  EXPECT_FALSE(is_present(late, 39999));
  EXPECT_TRUE(is_present(late, 40000));
  const std::vector<PresenceWindow> gaps{{1, 10}, {20, 30}};
  EXPECT_FALSE(is_present(gaps, 15));
  EXPECT_TRUE(is_present(gaps, 9));
  EXPECT_FALSE(is_present(gaps, 10));
  EXPECT_TRUE(is_present(gaps, 20));
}

TEST(Presence, InvalidWindowsRejected) {
  const std::vector<PresenceWindow> inverted{{10, 5}};
  EXPECT_THROW(validate_windows(inverted), ConfigError);
  const std::vector<PresenceWindow> overlap{{1, 10}, {5, 20}};
  EXPECT_THROW(validate_windows(overlap), ConfigError);
}

TEST(Presence, TransitionsReportedOnce) {
  PresenceTracker tracker({{1, 3}, {5, std::nullopt}});
  std::vector<PresenceTracker::Transition> seen;
  for (Slot t = 1; t <= 8; ++t) seen.push_back(tracker.advance(t));
  using T = PresenceTracker::Transition;
  const std::vector<T> want{T::kNone, T::kNone, T::kDepart, T::kNone, T::kJoin, T::kNone, T::kNone, T::kNone};
  EXPECT_EQ(seen, want);
}

TEST(Presence, LateJoinerJoinsExactlyOnce) {
  PresenceTracker tracker({{4, std::nullopt}});
  int joins = 0;
  for (Slot t = 1; t <= 10; ++t) joins += tracker.advance(t) == PresenceTracker::Transition::kJoin;
  EXPECT_EQ(joins, 1);
  EXPECT_TRUE(tracker.present());
}

TEST(Activation, SynchronousAgentAlwaysDecides) {
  Activation act(BernoulliRate{1.0}, stream());
  for (Slot t = 1; t <= 1000; ++t) EXPECT_TRUE(act.is_decision_slot(t));
}

TEST(Activation, ExplicitMembership) {
  Activation act(ExplicitSlots{{3, 7}}, stream());
  std::vector<Slot> hits;
  for (Slot t = 1; t <= 10; ++t) {
    if (act.is_decision_slot(t)) hits.push_back(t);
  }
  EXPECT_EQ(hits, (std::vector<Slot>{3, 7}));
  EXPECT_THROW(validate_schedule(ExplicitSlots{{7, 3}}), ConfigError);
}

TEST(Activation, BernoulliRateWithinThreeSigma) {
  const double p = 0.085;
  const Slot T = 80000;
  Activation act(BernoulliRate{p}, stream(3));
  int n = 0;
  for (Slot t = 1; t <= T; ++t) n += act.is_decision_slot(t);
  EXPECT_NEAR(n / double(T), p, 3 * std::sqrt(p * (1 - p) / T));
}

TEST(Activation, SineRateMatchesClampedMean) {
  const Slot T = 80000;
  for (int j = 1; j <= 10; ++j) {
    const double theta = j / 5.0;
    Activation act(SinePhase{theta, 30.0, false}, stream(j));
    double expected = 0;
    int n = 0;
    for (Slot t = 1; t <= T; ++t) {
      expected += std::max(0.0, std::sin(theta + t / 30.0));
      n += act.is_decision_slot(t);
    }
    EXPECT_NEAR(n / expected, 1.0, 0.05) << "j=" << j;
  }
}

TEST(Activation, SineAbsVariantUsesMagnitude) {
  Activation act(SinePhase{0.0, 30.0, true}, stream());
  const Slot t = 110;  // sin(t / 30) < 0
  EXPECT_NEAR(act.current_rate(t), std::abs(std::sin(t / 30.0)), 1e-12);
  EXPECT_LT(std::sin(t / 30.0), 0.0);
}

TEST(Activation, HalvingRateHalvesPerMessage) {
  Activation act(HalvingRate{0.1}, stream());
  EXPECT_DOUBLE_EQ(act.current_rate(1), 0.1);
  act.on_message_sent();
  act.on_message_sent();
  EXPECT_DOUBLE_EQ(act.current_rate(1), 0.025);
}

TEST(Activation, GeometricOnOffDutyCycleNearHalf) {
  const Slot T = 200000;
  Activation act(GeometricOnOff{1.0, 0.01, true}, stream(5));
  int n = 0;
  for (Slot t = 1; t <= T; ++t) n += act.is_decision_slot(t);
  EXPECT_NEAR(n / double(T), 0.5, 0.05);
}

TEST(Activation, ReplayIsDeterministic) {
  Activation a(BernoulliRate{0.3}, stream(9));
  Activation b(BernoulliRate{0.3}, stream(9));
  for (Slot t = 1; t <= 5000; ++t) ASSERT_EQ(a.is_decision_slot(t), b.is_decision_slot(t));
}

TEST(Activation, InvalidProbabilityRejected) {
  EXPECT_THROW(validate_schedule(BernoulliRate{1.5}), ConfigError);
  EXPECT_THROW(validate_schedule(GeometricOnOff{0.5, -0.1, true}), ConfigError);
}

}  // namespace
}  // namespace odc
