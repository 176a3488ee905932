#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "odc/metrics.hpp"

namespace odc {
namespace {

TEST(IbcExact, Examples) {
  const std::vector<std::uint64_t> two{5, 3};
  EXPECT_EQ(ibc_comm_exact(two), 8u);
  const std::vector<std::uint64_t> one{100};
  EXPECT_EQ(ibc_comm_exact(one), 0u);
  const std::vector<std::uint64_t> three{1, 1, 1};
  EXPECT_EQ(ibc_comm_exact(three), 6u);
}

std::uint64_t brute_c(std::uint64_t n, const ThresholdSchedule& f) {
  std::uint64_t sum = 0;
  for (std::uint64_t c = 1;; ++c) {
    const auto v = threshold_value(f, c);
    if (v > n - std::min(n, sum) || sum + v > n) return c - 1;
    sum += v;
  }
}

TEST(CjUcb, Examples) {
  EXPECT_EQ(c_j_ucb(10, ConstantThreshold{3}), 3u);
  EXPECT_EQ(c_j_ucb(1, GeometricThreshold{2}), 1u);
  EXPECT_EQ(c_j_ucb(100, GeometricThreshold{2}), 6u);
  EXPECT_EQ(c_j_ucb(0, ConstantThreshold{1}), 0u);
  EXPECT_EQ(c_j_ucb(2, ConstantThreshold{3}), 0u);
}

TEST(CjUcb, MatchesBruteForce) {
  const std::vector<ThresholdSchedule> fs{ConstantThreshold{1}, ConstantThreshold{7}, GeometricThreshold{2},
                                          GeometricThreshold{3}};
  for (const auto& f : fs) {
    for (std::uint64_t n = 0; n <= 10000; n += (n < 200 ? 1 : 37)) {
      ASSERT_EQ(c_j_ucb(n, f), brute_c(n, f)) << describe(f) << " N=" << n;
    }
  }
}

TEST(CjAae, BudgetCapsAtHorizon) {
  const std::vector<double> gaps{0.0, 0.5};
  EXPECT_NEAR(aae_budget(55, 2, 2.0, gaps), 55.0, 0.0);
  EXPECT_EQ(c_j_aae(55, GeometricThreshold{2}, 2, 2.0, gaps), c_j_ucb(55, GeometricThreshold{2}));
  const std::vector<double> tiny{0.0, 0.9};
  const double cap = 4 + 2 * 8 * 2.0 * std::log(1e6) / 0.81;
  EXPECT_NEAR(aae_budget(1000000, 2, 2.0, tiny), cap, 1e-9);
  EXPECT_EQ(c_j_aae(1000000, ConstantThreshold{1}, 2, 2.0, tiny), static_cast<std::uint64_t>(cap));
}

TEST(CommBound, Examples) {
  const std::vector<std::uint64_t> c{4, 9};
  EXPECT_EQ(comm_bound(c), 10u);
  const std::vector<std::uint64_t> three{1, 2, 3};
  EXPECT_EQ(comm_bound(three), 2u * (2 + 2 + 3));
  const std::vector<bool> shares{false, true, false, true, false, false, false, false, false};
  EXPECT_EQ(comm_bound(three, &shares), 2u * 2);
}

TEST(LowerBound, Examples) {
  const double n = std::exp(1.0);
  const std::vector<double> half{0.0, 0.5};
  EXPECT_NEAR(regret_lower_bound(n, half), 2.0, 1e-12);
  const std::vector<double> three{0.1, 0.2, 0.0};
  EXPECT_NEAR(regret_lower_bound(n, three), 15.0, 1e-12);
  const std::vector<double> mixed{0.1, 0.1, 0.2};
  EXPECT_NEAR(regret_lower_bound(n, mixed), 25.0, 1e-12);
  EXPECT_THROW(regret_lower_bound(0.0, half), InputError);
}

TrialLog pulls_of(std::initializer_list<std::pair<Slot, ArmId>> pulls) {
  TrialLog log;
  log.horizon = 20;
  log.num_agents = 1;
  log.num_arms = 3;
  for (const auto& [t, a] : pulls) log.pulls.push_back({t, 0, a, 0});
  log.decisions = {log.pulls.size()};
  return log;
}

TEST(Tau, FirstSlotExceedingBudget) {
  const auto log = pulls_of({{1, 1}, {2, 1}, {3, 0}, {4, 1}});
  EXPECT_EQ(compute_tau(log, 1, 1.5), Slot{2});
  EXPECT_EQ(compute_tau(log, 0, 0.0), Slot{3});
  EXPECT_FALSE(compute_tau(log, 2, 0.0));
  EXPECT_FALSE(compute_tau(log, 1, 3.0));
}

SimConfig team(std::uint64_t seed, PolicyKind policy, std::size_t m) {
  SimConfig c;
  c.instance = ExplicitMeans{{0.9, 0.6, 0.5, 0.3}};
  c.horizon = 4000;
  c.policy = policy;
  c.seed = seed;
  c.threshold = GeometricThreshold{2};
  c.log.record_counters = true;
  for (std::size_t j = 0; j < m; ++j) {
    AgentSpec a;
    a.schedule = BernoulliRate{j == 0 ? 1.0 : 0.2};
    a.label = j == 0 ? "fast" : "slow";
    c.agents.push_back(a);
  }
  return c;
}

TEST(RegretBound, SingleAgentReducesToLeadTerms) {
  for (auto policy : {PolicyKind::kUcb, PolicyKind::kAae}) {
    const auto c = team(3, policy, 1);
    const auto inst = resolve_instance(c);
    const auto log = run_trial(c, 0);
    const auto rep = regret_upper_bound(log, inst, {policy, c.alpha, 0, nullptr});
    const double s = policy == PolicyKind::kUcb ? 2.0 : 8.0;
    double want = 3.0 * 4;
    for (ArmId i = 1; i < 4; ++i) {
      want += s * c.alpha * std::log(static_cast<double>(log.decisions[0])) / suboptimality_gap(inst, i);
    }
    EXPECT_NEAR(rep.bound, want, 1e-9 * want);
    EXPECT_DOUBLE_EQ(rep.constant, 12.0);
  }
}

TEST(RegretBound, ConstantThresholdEnvelope) {
  auto c = team(5, PolicyKind::kUcb, 3);
  c.threshold = ConstantThreshold{2};
  const auto inst = resolve_instance(c);
  const auto log = run_trial(c, 0);
  const auto rep = regret_upper_bound(log, inst, {c.policy, c.alpha, 0, nullptr});
  const double n = std::accumulate(log.decisions.begin(), log.decisions.end(), 0.0);
  double envelope = 3.0 * 4 * 3;
  for (ArmId i = 1; i < 4; ++i) {
    const double g = suboptimality_gap(inst, i);
    envelope += 2 * c.alpha * std::log(n) / g + 3 * 2 * 2 * g;
  }
  EXPECT_LE(rep.bound, envelope + 1e-9);
  const auto regret = group_regret(log, inst);
  EXPECT_LE(regret.group_pseudo, rep.bound);
}

TEST(RegretBound, NeedsRecordedCounters) {
  auto c = team(1, PolicyKind::kUcb, 2);
  c.log.record_counters = false;
  const auto log = run_trial(c, 0);
  EXPECT_THROW(regret_upper_bound(log, resolve_instance(c), {}), ConfigError);
}

TEST(Regret, PseudoAndRealizedAgree) {
  auto c = team(8, PolicyKind::kUcb, 3);
  c.horizon = 20000;
  const auto inst = resolve_instance(c);
  const auto log = run_trial(c, 0);
  const auto r = group_regret(log, inst);
  double var = 0.0;
  for (const auto& p : log.pulls) {
    const double mu = inst.mean(p.arm);
    var += mu * (1 - mu);
  }
  EXPECT_NEAR(r.group_pseudo, r.group_realized, 3.0 * std::sqrt(var));
  EXPECT_DOUBLE_EQ(r.cumulative.back().second, r.group_pseudo);
  double per_agent = std::accumulate(r.per_agent_pseudo.begin(), r.per_agent_pseudo.end(), 0.0);
  EXPECT_NEAR(per_agent, r.group_pseudo, 1e-6);
}

TEST(Regret, HeterogeneousUsesLocalOptimum) {
  const auto inst = BanditInstance({0.9, 0.6, 0.5});
  TrialLog log;
  log.num_agents = 2;
  log.num_arms = 3;
  log.horizon = 2;
  log.pulls = {{1, 0, 1, 1}, {1, 1, 2, 0}};
  log.decisions = {1, 1};
  const std::vector<std::vector<ArmId>> sets{{1, 2}, {0, 2}};
  const auto r = group_regret(log, inst, &sets);
  EXPECT_NEAR(r.per_agent_pseudo[0], 0.0, 1e-12);
  EXPECT_NEAR(r.per_agent_pseudo[1], 0.4, 1e-12);
}

TEST(CommCategory, SplitsByLabelPair) {
  TrialLog log;
  log.num_agents = 3;
  log.data_sent = {0, 4, 1, 2, 0, 6, 3, 5, 0};
  const std::vector<std::string> labels{"fast", "slow", "slow"};
  const auto by = comm_by_category(log, labels);
  EXPECT_EQ(by.at("fast-slow"), 4u + 1 + 2 + 3);
  EXPECT_EQ(by.at("slow-slow"), 6u + 5);
  EXPECT_EQ(by.count("fast-fast"), 0u);
}

TEST(Summary, IbcBoundIsExactCount) {
  auto c = team(2, PolicyKind::kUcb, 3);
  c.protocol = ProtocolKind::kIbc;
  c.threshold = ConstantThreshold{1};
  const auto inst = resolve_instance(c);
  const auto log = run_trial(c, 0);
  const auto m = summarize(log, c, inst);
  EXPECT_EQ(m.data_messages, m.bound_comm);
  EXPECT_EQ(m.comm_fast_slow + m.comm_slow_slow + m.comm_fast_fast, m.data_messages);
  ASSERT_TRUE(m.bound_regret_upper);
  EXPECT_GT(m.bound_regret_lower, 0.0);
}

}  // namespace
}  // namespace odc
