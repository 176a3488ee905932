#include <gtest/gtest.h>

#include "odc/simulator.hpp"

namespace odc {
namespace {

SimConfig two_agent_walkthrough() {
  SimConfig c;
  c.name = "walkthrough";
  c.instance = ExplicitMeans{{0.7, 0.4, 0.2}};
  c.horizon = 10;
  c.protocol = ProtocolKind::kOdc;
  c.threshold = GeometricThreshold{2};
  c.log.record_messages = true;
  c.log.record_counters = true;
  AgentSpec a;
  a.schedule = ExplicitSlots{{1, 2, 3, 5, 6, 7, 10}};
  AgentSpec b;
  b.schedule = ExplicitSlots{{4, 8, 9}};
  c.agents = {a, b};
  return c;
}

TEST(Simulator, WalkthroughSendReplyDemandSequence) {
  const auto log = run_trial(two_agent_walkthrough(), 0);
  ASSERT_EQ(log.messages.size(), 5u);
  struct Expect {
    Slot slot;
    AgentId from;
    std::uint64_t obs;
    std::uint64_t c_after;
    std::uint64_t f_after;
    bool reply;
  };
  const Expect want[] = {
      {1, 0, 1, 2, 2, false},
      {4, 1, 1, 2, 2, false},
      {4, 0, 2, 3, 4, true},
      {9, 1, 2, 3, 4, false},
      {10, 0, 4, 4, 8, false},
  };
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& m = log.messages[i];
    SCOPED_TRACE(i);
    EXPECT_EQ(m.send_slot, want[i].slot);
    EXPECT_EQ(m.from, want[i].from);
    EXPECT_EQ(m.obs_count, want[i].obs);
    EXPECT_EQ(m.counter_after, want[i].c_after);
    EXPECT_EQ(m.threshold_after, want[i].f_after);
    EXPECT_EQ(m.reply, want[i].reply);
    EXPECT_TRUE(m.delivered);
    EXPECT_EQ(m.delivered_slot, m.send_slot);
  }
  const std::vector<DemandEvent> demands{
      {1, 1, 0, 0, 1}, {4, 1, 0, 0, 2}, {9, 0, 1, 3, 4}, {10, 1, 0, 0, 4}};
  EXPECT_EQ(log.demands, demands);
  EXPECT_EQ(log.decisions, (std::vector<std::uint64_t>{7, 3}));
  EXPECT_EQ(log.total_data(), 5u);
}

SimConfig random_team(std::uint64_t seed, ProtocolKind protocol, PolicyKind policy) {
  SimConfig c;
  c.instance = UniformMeans{6, 0.05, 0.95};
  c.horizon = 3000;
  c.protocol = protocol;
  c.policy = policy;
  c.threshold = GeometricThreshold{2};
  c.seed = seed;
  for (double p : {1.0, 0.3, 0.05}) {
    AgentSpec a;
    a.schedule = BernoulliRate{p};
    c.agents.push_back(a);
  }
  return c;
}

TEST(Simulator, SameSeedSameLog) {
  for (auto policy : {PolicyKind::kUcb, PolicyKind::kAae}) {
    auto c = random_team(42, ProtocolKind::kOdc, policy);
    c.log.record_messages = true;
    EXPECT_EQ(run_trial(c, 3), run_trial(c, 3));
  }
}

TEST(Simulator, ParallelismDoesNotChangeResults) {
  const auto c = random_team(7, ProtocolKind::kIbc, PolicyKind::kUcb);
  const auto serial = run_experiment(c, 4, 1);
  const auto threaded = run_experiment(c, 4, 3);
  ASSERT_EQ(serial.size(), threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i], threaded[i]);
  EXPECT_NE(serial[0].pulls, serial[1].pulls);
}

TEST(Simulator, EveryDecisionIsOnePull) {
  const auto log = run_trial(random_team(3, ProtocolKind::kOdc, PolicyKind::kUcb), 0);
  std::vector<std::uint64_t> counted(3, 0);
  for (const auto& p : log.pulls) ++counted[p.agent];
  EXPECT_EQ(counted, log.decisions);
  EXPECT_EQ(log.decisions[0], 3000u);
}

TEST(Simulator, IbcUnitThresholdSendsAfterEveryPull) {
  auto c = random_team(5, ProtocolKind::kIbc, PolicyKind::kUcb);
  c.threshold = ConstantThreshold{1};
  const auto log = run_trial(c, 0);
  for (AgentId j = 0; j < 3; ++j) {
    for (AgentId k = 0; k < 3; ++k) {
      if (j != k) EXPECT_EQ(log.data_sent[log.pair_index(j, k)], log.decisions[j]);
    }
  }
}

TEST(Simulator, LateJoinerDecidesOnlyAfterJoining) {
  auto c = random_team(9, ProtocolKind::kOdc, PolicyKind::kUcb);
  c.agents[1].presence = {PresenceWindow{1000, std::nullopt}};
  c.agents[2].presence = {PresenceWindow{1, 500}};
  c.log.record_messages = true;
  const auto log = run_trial(c, 0);
  for (const auto& p : log.pulls) {
    if (p.agent == 1) EXPECT_GE(p.slot, 1000u);
    if (p.agent == 2) EXPECT_LT(p.slot, 500u);
  }
  ASSERT_EQ(log.presence.size(), 2u);
  EXPECT_EQ(log.presence[0], (PresenceEvent{500, 2, false}));
  EXPECT_EQ(log.presence[1], (PresenceEvent{1000, 1, true}));
  for (const auto& m : log.messages) {
    if (m.kind != MessageKind::kData) continue;
    if (m.to == 2) EXPECT_LT(m.send_slot, 500u);
    if (m.to == 1) EXPECT_GE(m.delivered_slot, 1000u);
  }
}

TEST(Simulator, DelayedMessagesArriveLater) {
  auto c = random_team(11, ProtocolKind::kOdc, PolicyKind::kUcb);
  c.delay = 4;
  c.log.record_messages = true;
  const auto log = run_trial(c, 0);
  ASSERT_FALSE(log.messages.empty());
  for (const auto& m : log.messages) {
    EXPECT_EQ(m.deliver_slot, m.send_slot + 4);
    if (m.delivered) EXPECT_GE(m.delivered_slot, m.deliver_slot);
  }
}

TEST(Simulator, InvalidConfigsRejected) {
  auto c = random_team(1, ProtocolKind::kOdc, PolicyKind::kUcb);
  c.agents.clear();
  EXPECT_THROW(validate(c), ConfigError);
  c = random_team(1, ProtocolKind::kOdc, PolicyKind::kUcb);
  c.alpha = 0.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = random_team(1, ProtocolKind::kOdc, PolicyKind::kUcb);
  c.agents[0].arms = {9};
  EXPECT_THROW(validate(c), ConfigError);
}

}  // namespace
}  // namespace odc
