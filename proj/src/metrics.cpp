#include "odc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace odc {

namespace {

double log_n(double n) { return n > 1.0 ? std::log(n) : 0.0; }

std::uint64_t loosest_threshold(const ThresholdSchedule& f, std::uint64_t c) {
  return threshold_value(f, c, 1);
}

/// Largest C with Σ_{c<=C} f(c) <= budget.
std::uint64_t count_fitting(const ThresholdSchedule& f, double budget) {
  std::uint64_t c = 0;
  double partial = 0.0;
  for (;;) {
    const double next = static_cast<double>(loosest_threshold(f, c + 1));
    if (partial + next > budget) return c;
    partial += next;
    ++c;
  }
}

std::vector<ArmId> local_optima(const BanditInstance& instance, std::size_t m,
                                const std::vector<std::vector<ArmId>>* local_sets) {
  std::vector<ArmId> best(m, instance.optimal_arm());
  if (local_sets != nullptr) {
    for (std::size_t j = 0; j < m; ++j) best[j] = instance.local_optimal_arm((*local_sets)[j]);
  }
  return best;
}

bool holds(const std::vector<std::vector<ArmId>>* local_sets, std::size_t j, ArmId arm) {
  if (local_sets == nullptr) return true;
  const auto& s = (*local_sets)[j];
  return std::binary_search(s.begin(), s.end(), arm);
}

}  // namespace

RegretSummary group_regret(const TrialLog& log, const BanditInstance& instance,
                           const std::vector<std::vector<ArmId>>* local_sets) {
  const std::size_t m = log.num_agents;
  if (local_sets != nullptr && local_sets->size() != m) throw InputError("local set count mismatch");
  const auto best = local_optima(instance, m, local_sets);
  RegretSummary out;
  out.per_agent_pseudo.assign(m, 0.0);
  std::vector<std::uint64_t> rewards(m, 0);
  double running = 0.0;
  for (std::size_t idx = 0; idx < log.pulls.size(); ++idx) {
    const auto& p = log.pulls[idx];
    const double gap = instance.mean(best[p.agent]) - instance.mean(p.arm);
    out.per_agent_pseudo[p.agent] += gap;
    rewards[p.agent] += p.reward;
    running += gap;
    if (idx + 1 == log.pulls.size() || log.pulls[idx + 1].slot != p.slot) {
      out.cumulative.emplace_back(p.slot, running);
    }
  }
  out.per_agent_realized.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    out.per_agent_realized[j] = instance.mean(best[j]) * static_cast<double>(log.decisions[j]) -
                                static_cast<double>(rewards[j]);
  }
  out.group_pseudo = std::accumulate(out.per_agent_pseudo.begin(), out.per_agent_pseudo.end(), 0.0);
  out.group_realized =
      std::accumulate(out.per_agent_realized.begin(), out.per_agent_realized.end(), 0.0);
  return out;
}

std::uint64_t ibc_comm_exact(std::span<const std::uint64_t> decisions) {
  if (decisions.empty()) return 0;
  const std::uint64_t peers = decisions.size() - 1;
  std::uint64_t total = 0;
  for (auto n : decisions) total += peers * n;
  return total;
}

std::uint64_t c_j_ucb(std::uint64_t n_j, const ThresholdSchedule& f) {
  validate_threshold(f);
  return count_fitting(f, static_cast<double>(n_j));
}

double aae_budget(std::uint64_t n_j, std::size_t k, double alpha, std::span<const double> gaps) {
  double min_gap = 0.0;
  for (double g : gaps) {
    if (g < 0.0) throw InputError("gaps must be non-negative");
    if (g > 0.0 && (min_gap == 0.0 || g < min_gap)) min_gap = g;
  }
  double budget = 2.0 * static_cast<double>(k);
  if (min_gap > 0.0) {
    const double ln = log_n(static_cast<double>(n_j));
    for (double g : gaps) {
      budget += 8.0 * alpha * ln / std::max(g * g, min_gap * min_gap);
    }
  }
  return std::min(budget, static_cast<double>(n_j));
}

std::uint64_t c_j_aae(std::uint64_t n_j, const ThresholdSchedule& f, std::size_t k, double alpha,
                      std::span<const double> gaps) {
  validate_threshold(f);
  return count_fitting(f, aae_budget(n_j, k, alpha, gaps));
}

std::uint64_t comm_bound(std::span<const std::uint64_t> c_values, const std::vector<bool>* shares) {
  const std::size_t m = c_values.size();
  if (shares != nullptr && shares->size() != m * m) throw InputError("share matrix must be M x M");
  std::uint64_t total = 0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t q = 0; q < m; ++q) {
      if (j == q) continue;
      if (shares != nullptr && !(*shares)[j * m + q]) continue;
      total += std::min(c_values[j], c_values[q]) + 1;
    }
  }
  return total;
}

double regret_lower_bound(double n, std::span<const double> gaps) {
  if (!(n > 0.0)) throw InputError("N must be positive");
  double total = 0.0;
  for (double g : gaps) {
    if (g < 0.0) throw InputError("gaps must be non-negative");
    if (g > 0.0) total += std::log(n) / g;
  }
  return total;
}

std::optional<Slot> compute_tau(const TrialLog& log, ArmId arm, double budget) {
  std::uint64_t count = 0;
  for (std::size_t idx = 0; idx < log.pulls.size(); ++idx) {
    const auto& p = log.pulls[idx];
    if (p.arm == arm) ++count;
    const bool slot_end = idx + 1 == log.pulls.size() || log.pulls[idx + 1].slot != p.slot;
    if (slot_end && static_cast<double>(count) > budget) return p.slot;
  }
  return std::nullopt;
}

std::uint64_t threshold_at(const TrialLog& log, AgentId from, AgentId to, Slot t) {
  if (!log.counters_recorded) throw ConfigError("counter history was not recorded");
  const auto& history = log.counters.at(log.pair_index(from, to));
  if (history.empty()) throw InputError("pair has no counter history");
  const auto it = std::upper_bound(history.begin(), history.end(), t,
                                   [](Slot v, const CounterChange& c) { return v < c.slot; });
  return it == history.begin() ? history.front().threshold : std::prev(it)->threshold;
}

RegretBoundReport regret_upper_bound(const TrialLog& log, const BanditInstance& instance,
                              const BoundContext& ctx) {
  if (!log.counters_recorded) throw ConfigError("regret bound needs recorded counters");
  const std::size_t m = log.num_agents;
  const std::size_t k = instance.num_arms();
  const bool aae = ctx.policy == PolicyKind::kAae;
  const auto* sets = ctx.local_sets;
  const double n_total =
      static_cast<double>(std::accumulate(log.decisions.begin(), log.decisions.end(), std::uint64_t{0}));
  const double ln = log_n(n_total);
  const double explore = (aae ? 8.0 : 2.0) * ctx.alpha * ln;
  const double d2 = 2.0 * static_cast<double>(ctx.delay);

  RegretBoundReport rep;
  rep.constant = 3.0 * static_cast<double>(k) * static_cast<double>(m);
  rep.bound = rep.constant;
  const auto best = local_optima(instance, m, sets);

  // Σ_{j' in peers, j' != j} (2d + f(c^{j'->j}_{τ}))
  auto delayed_mass = [&](std::size_t j, ArmId arm, Slot tau) {
    double s = 0.0;
    for (std::size_t q = 0; q < m; ++q) {
      if (q == j || !holds(sets, q, arm)) continue;
      if (log.counters[log.pair_index(static_cast<AgentId>(q), static_cast<AgentId>(j))].empty()) {
        continue;
      }
      s += d2 + static_cast<double>(
                    threshold_at(log, static_cast<AgentId>(q), static_cast<AgentId>(j), tau));
    }
    return s;
  };

  for (ArmId i = 0; i < k; ++i) {
    ArmBoundTerm term;
    term.arm = i;
    if (sets == nullptr) {
      term.gap = suboptimality_gap(instance, i);
      if (term.gap <= 0.0) continue;
      term.budget = explore / (term.gap * term.gap);
      term.lead = explore / term.gap;
      term.tau = compute_tau(log, i, term.budget);
      if (term.tau) {
        for (std::size_t j = 0; j < m; ++j) {
          term.delay_term += std::min(delayed_mass(j, i, *term.tau), term.budget) * term.gap;
        }
      }
    } else {
      // Agents holding i whose local optimum is a different, strictly better arm.
      std::vector<std::size_t> suboptimal_holders;
      double gap_min = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) {
        if (!holds(sets, j, i)) continue;
        const double g = instance.mean(best[j]) - instance.mean(i);
        if (g <= 0.0) continue;
        suboptimal_holders.push_back(j);
        gap_min = std::min(gap_min, g);
      }
      if (suboptimal_holders.empty()) continue;
      term.gap = gap_min;
      term.budget = explore / (gap_min * gap_min);
      term.lead = 2.0 * explore / gap_min;
      term.tau = compute_tau(log, i, term.budget);
      if (term.tau) {
        for (std::size_t j : suboptimal_holders) {
          const double g = instance.mean(best[j]) - instance.mean(i);
          term.delay_term += std::min(delayed_mass(j, i, *term.tau), explore / (g * g)) * g;
        }
      }
    }
    rep.bound += term.lead + term.delay_term;
    rep.arms.push_back(term);
  }
  return rep;
}

std::map<std::string, std::uint64_t> comm_by_category(const TrialLog& log,
                                                      std::span<const std::string> labels) {
  if (labels.size() != log.num_agents) throw InputError("one label per agent required");
  std::map<std::string, std::uint64_t> out;
  for (std::size_t a = 0; a < log.num_agents; ++a) {
    for (std::size_t b = 0; b < log.num_agents; ++b) {
      const auto n = log.data_sent[log.pair_index(static_cast<AgentId>(a), static_cast<AgentId>(b))];
      if (a == b) continue;
      const auto& x = std::min(labels[a], labels[b]);
      const auto& y = std::max(labels[a], labels[b]);
      out[x + "-" + y] += n;
    }
  }
  return out;
}

CommBoundReport odc_comm_bound(const TrialLog& log, const BanditInstance& instance,
                               const ThresholdSchedule& f, const BoundContext& ctx) {
  const std::size_t m = log.num_agents;
  const auto* sets = ctx.local_sets;
  CommBoundReport rep;
  rep.c_values.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto n_j = log.decisions[j];
    if (ctx.policy == PolicyKind::kUcb) {
      rep.c_values[j] = c_j_ucb(n_j, f);
      continue;
    }
    std::vector<double> gaps;
    if (sets == nullptr) {
      for (ArmId i = 0; i < instance.num_arms(); ++i) gaps.push_back(suboptimality_gap(instance, i));
    } else {
      const ArmId b = instance.local_optimal_arm((*sets)[j]);
      for (ArmId i : (*sets)[j]) gaps.push_back(instance.mean(b) - instance.mean(i));
    }
    rep.c_values[j] = c_j_aae(n_j, f, gaps.size(), ctx.alpha, gaps);
  }
  if (sets == nullptr) {
    rep.bound = comm_bound(rep.c_values);
  } else {
    std::vector<bool> shares(m * m, false);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        std::vector<ArmId> common;
        std::set_intersection((*sets)[a].begin(), (*sets)[a].end(), (*sets)[b].begin(),
                              (*sets)[b].end(), std::back_inserter(common));
        shares[a * m + b] = !common.empty();
      }
    }
    rep.bound = comm_bound(rep.c_values, &shares);
  }
  return rep;
}

MetricsSummary summarize(const TrialLog& log, const SimConfig& config, const BanditInstance& instance) {
  MetricsSummary s;
  std::vector<std::vector<ArmId>> sets;
  const bool hetero = config.heterogeneous();
  if (hetero) sets = local_arm_sets(config, instance.num_arms());
  BoundContext ctx{config.policy, config.alpha, config.delay, hetero ? &sets : nullptr};

  const auto regret = group_regret(log, instance, ctx.local_sets);
  s.group_regret = regret.group_pseudo;
  s.group_regret_realized = regret.group_realized;
  s.data_messages = log.total_data();
  s.control_messages = log.total_control();
  s.n_total = std::accumulate(log.decisions.begin(), log.decisions.end(), std::uint64_t{0});

  std::vector<std::string> labels;
  for (const auto& a : config.agents) labels.push_back(a.label);
  for (const auto& [key, n] : comm_by_category(log, labels)) {
    if (key == "fast-fast") s.comm_fast_fast = n;
    else if (key == "fast-slow") s.comm_fast_slow = n;
    else if (key == "slow-slow") s.comm_slow_slow = n;
  }

  if (config.protocol == ProtocolKind::kIbc) {
    s.bound_comm = ibc_comm_exact(log.decisions);
  } else {
    s.bound_comm = odc_comm_bound(log, instance, config.threshold, ctx).bound;
  }
  if (log.counters_recorded) s.bound_regret_upper = regret_upper_bound(log, instance, ctx).bound;

  std::vector<double> gaps;
  for (ArmId i = 0; i < instance.num_arms(); ++i) gaps.push_back(suboptimality_gap(instance, i));
  s.bound_regret_lower = s.n_total > 0 ? regret_lower_bound(static_cast<double>(s.n_total), gaps) : 0.0;
  return s;
}

}  // namespace odc
