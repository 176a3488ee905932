#include "odc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace odc {

bool SimConfig::heterogeneous() const {
  return std::any_of(agents.begin(), agents.end(), [](const AgentSpec& a) { return !a.arms.empty(); });
}

void validate(const SimConfig& config) {
  if (config.agents.empty()) throw ConfigError("need at least one agent (M >= 1)");
  if (config.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(config.alpha >= 2.0)) throw ConfigError("alpha must be >= 2");
  validate_threshold(config.threshold);
  std::size_t k = 0;
  if (const auto* e = std::get_if<ExplicitMeans>(&config.instance)) {
    k = e->means.size();
    BanditInstance check(e->means);  // range checks
  } else {
    const auto& u = std::get<UniformMeans>(config.instance);
    if (u.k == 0) throw ConfigError("instance needs K >= 1");
    if (!(u.low >= 0.0 && u.high <= 1.0 && u.low <= u.high)) {
      throw ConfigError("uniform means need 0 <= low <= high <= 1");
    }
    k = u.k;
  }
  for (const auto& agent : config.agents) {
    validate_schedule(agent.schedule);
    validate_windows(agent.presence);
    if (agent.label.empty()) throw ConfigError("every agent needs a label");
  }
  if (config.heterogeneous()) {
    const auto sets = local_arm_sets(config, k);
    bool overlap = config.agents.size() == 1;
    for (std::size_t a = 0; a < sets.size() && !overlap; ++a) {
      for (std::size_t b = a + 1; b < sets.size() && !overlap; ++b) {
        std::vector<ArmId> common;
        std::set_intersection(sets[a].begin(), sets[a].end(), sets[b].begin(), sets[b].end(),
                              std::back_inserter(common));
        overlap = !common.empty();
      }
    }
    if (!overlap) throw ConfigError("heterogeneous arm sets: at least two sets must overlap");
  }
}

std::vector<std::vector<ArmId>> local_arm_sets(const SimConfig& config, std::size_t num_arms) {
  const bool hetero = config.heterogeneous();
  std::vector<std::vector<ArmId>> sets;
  sets.reserve(config.agents.size());
  for (const auto& agent : config.agents) {
    std::vector<ArmId> arms = agent.arms;
    if (!hetero) {
      arms.resize(num_arms);
      std::iota(arms.begin(), arms.end(), ArmId{0});
    } else if (arms.empty()) {
      throw ConfigError("heterogeneous mode: every agent must list its arms");
    }
    std::sort(arms.begin(), arms.end());
    if (std::adjacent_find(arms.begin(), arms.end()) != arms.end()) {
      throw ConfigError("duplicate arm in local arm set");
    }
    for (ArmId a : arms) {
      if (a >= num_arms) throw ConfigError("local arm " + std::to_string(a) + " out of range");
    }
    sets.push_back(std::move(arms));
  }
  return sets;
}

BanditInstance resolve_instance(const SimConfig& config) {
  if (const auto* e = std::get_if<ExplicitMeans>(&config.instance)) return BanditInstance(e->means);
  const auto& u = std::get<UniformMeans>(config.instance);
  RngStream rng(config.seed, {StreamPurpose::kInstance, 0, 0});
  return BanditInstance::uniform_random(u.k, u.low, u.high, rng);
}

std::uint64_t TrialLog::total_data() const {
  return std::accumulate(data_sent.begin(), data_sent.end(), std::uint64_t{0});
}

std::uint64_t TrialLog::total_control() const {
  return std::accumulate(control_sent.begin(), control_sent.end(), std::uint64_t{0});
}

namespace {

constexpr int kNoPeer = -1;

struct AgentRuntime {
  AgentId id = 0;
  PresenceTracker presence;
  Activation activation;
  RngStream reward_rng;
  AaeState policy;                  // UCB agents use only the statistics part
  std::vector<PeerCommState> peers;  // ascending peer id
  std::vector<int> peer_slot;        // by AgentId -> index into peers
  std::vector<Envelope> deferred;    // delivered while offline

  PeerCommState* peer(AgentId other) {
    const int idx = peer_slot[other];
    return idx == kNoPeer ? nullptr : &peers[static_cast<std::size_t>(idx)];
  }
};

class TrialEngine {
 public:
  TrialEngine(const SimConfig& config, std::uint64_t trial)
      : config_(config),
        instance_(resolve_instance(config)),
        hetero_(config.heterogeneous()),
        m_(config.num_agents()),
        k_(instance_.num_arms()) {
    arm_sets_ = local_arm_sets(config, k_);
    log_.trial = trial;
    log_.horizon = config.horizon;
    log_.num_agents = m_;
    log_.num_arms = k_;
    log_.delay = config.delay;
    log_.decisions.assign(m_, 0);
    log_.data_sent.assign(m_ * m_, 0);
    log_.control_sent.assign(m_ * m_, 0);
    log_.counters_recorded = config.log.record_counters;
    if (config.log.record_counters) log_.counters.assign(m_ * m_, {});
    msg_index_.assign(m_, {});

    agents_.reserve(m_);
    for (AgentId j = 0; j < m_; ++j) {
      const auto& spec = config.agents[j];
      PolicyState stats(k_, arm_sets_[j], config.alpha);
      agents_.push_back(AgentRuntime{
          j, PresenceTracker(spec.presence),
          Activation(spec.schedule, RngStream(config.seed, {StreamPurpose::kSchedule, trial, j})),
          RngStream(config.seed, {StreamPurpose::kReward, trial, j}), AaeState(std::move(stats)),
          {}, std::vector<int>(m_, kNoPeer), {}});
    }
    for (AgentId j = 0; j < m_; ++j) {
      auto& agent = agents_[j];
      for (AgentId p = 0; p < m_; ++p) {
        if (p == j) continue;
        std::vector<bool> shared(k_, false);
        bool any = false;
        for (ArmId a : arm_sets_[j]) {
          if (std::binary_search(arm_sets_[p].begin(), arm_sets_[p].end(), a)) {
            shared[a] = true;
            any = true;
          }
        }
        if (!any) continue;
        auto state = make_peer_state(p, std::move(shared), config.threshold, candidate_size(agent));
        // Agents absent at slot 1 have not joined yet; peers wait for their Join.
        const bool online = is_present(config.agents[p].presence, 1);
        state.peer_online = online;
        state.exchange_demand = online;
        agent.peer_slot[p] = static_cast<int>(agent.peers.size());
        agent.peers.push_back(std::move(state));
        if (hetero_) agent.policy.track_peer(p, arm_sets_[p]);
        if (config.log.record_counters) {
          const auto& s = agent.peers.back();
          log_.counters[log_.pair_index(j, p)].push_back({0, s.comm_counter, s.threshold});
        }
      }
    }
  }

  TrialLog run() {
    for (Slot t = 1; t <= config_.horizon; ++t) {
      current_slot_ = t;
      presence_phase(t);
      decision_phase(t);
      delivery_phase(t);
      if (data_changed_) {
        log_.data_cumulative.emplace_back(t, data_total_);
        data_changed_ = false;
      }
    }
    finish();
    return std::move(log_);
  }

 private:
  std::uint64_t candidate_size(const AgentRuntime& agent) const {
    return agent.policy.candidate_size();
  }

  bool comm_allowed(const AgentRuntime& agent, AgentId peer) const {
    if (config_.policy != PolicyKind::kAae) return true;
    return aae_should_communicate(agent.policy, peer, hetero_);
  }

  void presence_phase(Slot t) {
    for (auto& agent : agents_) {
      const auto transition = agent.presence.advance(t);
      if (transition == PresenceTracker::Transition::kNone) continue;
      const bool join = transition == PresenceTracker::Transition::kJoin;
      log_.presence.push_back({t, agent.id, join});
      for (AgentId p = 0; p < m_; ++p) {
        if (p == agent.id || agents_[p].peer_slot[agent.id] == kNoPeer) continue;
        send_control(agent.id, p, join ? MessagePayload{JoinNotice{}} : MessagePayload{DepartNotice{}},
                     t);
      }
      if (join) {
        for (auto& env : agent.deferred) queue_.requeue(std::move(env));
        agent.deferred.clear();
      }
    }
  }

  void decision_phase(Slot t) {
    for (auto& agent : agents_) {
      if (!agent.presence.present()) continue;
      if (!agent.activation.is_decision_slot(t)) continue;
      decide(agent, t);
    }
  }

  void decide(AgentRuntime& agent, Slot t) {
    ArmId arm = 0;
    if (config_.policy == PolicyKind::kAae) {
      const auto removed = aae_eliminate(agent.policy);
      for (ArmId r : removed) {
        log_.eliminations.push_back({t, agent.id, r});
        broadcast_elimination(agent, r, t);
      }
      if (!removed.empty()) refresh_thresholds(agent);
      arm = aae_select(agent.policy);
    } else {
      arm = ucb_select(agent.policy.base());
    }
    const int reward = sample_reward(instance_, arm, agent.reward_rng);
    agent.policy.base().record_pull(arm, reward);
    ++log_.decisions[agent.id];
    log_.pulls.push_back({t, agent.id, arm, static_cast<std::uint8_t>(reward)});

    for (auto& peer : agent.peers) {
      if (!comm_allowed(agent, peer.peer)) continue;
      record_observation(peer, arm, reward);
      auto payload = config_.protocol == ProtocolKind::kOdc
                         ? odc_try_send_on_pull(peer, config_.threshold, candidate_size(agent))
                         : ibc_try_send(peer, config_.threshold, candidate_size(agent));
      if (payload) send_data(agent, peer, std::move(*payload), t, false);
    }
  }

  void broadcast_elimination(AgentRuntime& agent, ArmId arm, Slot t) {
    for (const auto& peer : agent.peers) {
      if (hetero_ && !std::binary_search(arm_sets_[peer.peer].begin(), arm_sets_[peer.peer].end(), arm)) {
        continue;
      }
      send_control(agent.id, peer.peer, EliminationNotice{arm}, t);
    }
  }

  void refresh_thresholds(AgentRuntime& agent) {
    if (!std::holds_alternative<CandidateScaledDoubling>(config_.threshold)) return;
    for (auto& peer : agent.peers) {
      const auto before = peer.threshold;
      refresh_threshold(peer, config_.threshold, candidate_size(agent));
      if (peer.threshold != before) note_counter(agent.id, peer, current_slot_);
    }
  }

  void note_counter(AgentId from, const PeerCommState& peer, Slot t) {
    if (!config_.log.record_counters) return;
    log_.counters[log_.pair_index(from, peer.peer)].push_back({t, peer.comm_counter, peer.threshold});
  }

  void send_data(AgentRuntime& agent, PeerCommState& peer, DataPayload payload, Slot t, bool reply) {
    const std::uint64_t obs = payload.total_count();
    const auto arm_count = static_cast<std::uint32_t>(payload.tallies.size());
    const auto& env = queue_.enqueue(agent.id, peer.peer, std::move(payload), t, config_.delay);
    ++log_.data_sent[log_.pair_index(agent.id, peer.peer)];
    ++data_total_;
    data_changed_ = true;
    note_counter(agent.id, peer, t);
    if (config_.log.record_messages) {
      const auto shared_arms = static_cast<std::uint64_t>(std::count(peer.shared.begin(), peer.shared.end(), true));
      MessageRecord rec;
      rec.send_slot = t;
      rec.deliver_slot = env.deliver_slot;
      rec.from = agent.id;
      rec.to = peer.peer;
      rec.kind = MessageKind::kData;
      rec.arm_count = arm_count;
      rec.obs_count = obs;
      rec.bits = message_bits(shared_arms, obs);
      rec.counter_after = peer.comm_counter;
      rec.threshold_after = peer.threshold;
      rec.reply = reply;
      track_message(env, std::move(rec));
    }
    agent.activation.on_message_sent();
  }

  void send_control(AgentId from, AgentId to, MessagePayload payload, Slot t) {
    const auto kind = kind_of(payload);
    const ArmId arm = kind == MessageKind::kElimination ? std::get<EliminationNotice>(payload).arm : 0;
    const auto& env = queue_.enqueue(from, to, std::move(payload), t, config_.delay);
    ++log_.control_sent[log_.pair_index(from, to)];
    if (config_.log.record_messages) {
      MessageRecord rec;
      rec.send_slot = t;
      rec.deliver_slot = env.deliver_slot;
      rec.from = from;
      rec.to = to;
      rec.kind = kind;
      rec.arm_count = kind == MessageKind::kElimination ? 1 : 0;
      rec.arm = arm;
      track_message(env, std::move(rec));
    }
  }

  void track_message(const Envelope& env, MessageRecord rec) {
    auto& index = msg_index_[env.from];
    if (index.size() <= env.seq) index.resize(env.seq + 1, 0);
    index[env.seq] = log_.messages.size();
    log_.messages.push_back(std::move(rec));
  }

  void delivery_phase(Slot t) {
    const std::uint64_t cap = 2 * m_;
    std::uint64_t depth = 0;
    for (;;) {
      auto batch = queue_.drain_due(t);
      if (batch.empty()) break;
      if (++depth > cap) throw ProtocolError("same-slot message cascade exceeded depth cap");
      for (auto& env : batch) {
        auto& recipient = agents_[env.to];
        if (!recipient.presence.present()) {
          recipient.deferred.push_back(std::move(env));
          continue;
        }
        deliver(recipient, env, t);
      }
    }
    log_.max_cascade_depth = std::max(log_.max_cascade_depth, depth);
  }

  void deliver(AgentRuntime& agent, const Envelope& env, Slot t) {
    if (config_.log.record_messages) {
      auto& rec = log_.messages[msg_index_[env.from][env.seq]];
      rec.delivered = true;
      rec.delivered_slot = t;
    }
    PeerCommState* link = agent.peer(env.from);
    if (link == nullptr) throw ProtocolError("message from an agent sharing no arms");
    switch (kind_of(env.payload)) {
      case MessageKind::kData: {
        const auto& data = std::get<DataPayload>(env.payload);
        data.validate();
        agent.policy.base().merge(data);
        if (config_.protocol != ProtocolKind::kOdc || !comm_allowed(agent, env.from)) break;
        auto reply = odc_on_receive(*link, config_.threshold, candidate_size(agent));
        if (reply) {
          send_data(agent, *link, std::move(*reply), t, true);
        } else if (config_.log.record_messages) {
          log_.demands.push_back({t, agent.id, env.from, link->buffered_total, link->threshold});
        }
        break;
      }
      case MessageKind::kElimination: {
        const ArmId arm = std::get<EliminationNotice>(env.payload).arm;
        const auto before = agent.policy.candidate_size();
        process_elimination_notice(agent.policy, arm, env.from, hetero_);
        if (agent.policy.candidate_size() != before) refresh_thresholds(agent);
        break;
      }
      case MessageKind::kJoin:
        handle_presence_notice(*link, PresenceNotice::kJoin);
        break;
      case MessageKind::kDepart:
        handle_presence_notice(*link, PresenceNotice::kDepart);
        break;
    }
  }

  void finish() {
    log_.undelivered = queue_.pending();
    for (const auto& agent : agents_) log_.undelivered += agent.deferred.size();
    log_.final_state.reserve(m_);
    for (const auto& agent : agents_) {
      AgentSnapshot snap;
      snap.stats.reserve(k_);
      for (ArmId a = 0; a < k_; ++a) snap.stats.push_back(agent.policy.base().stats(a));
      snap.candidates.assign(agent.policy.candidates().begin(), agent.policy.candidates().end());
      log_.final_state.push_back(std::move(snap));
    }
  }

  const SimConfig& config_;
  BanditInstance instance_;
  bool hetero_;
  std::size_t m_;
  std::size_t k_;
  std::vector<std::vector<ArmId>> arm_sets_;
  std::vector<AgentRuntime> agents_;
  DeliveryQueue queue_;
  TrialLog log_;
  std::vector<std::vector<std::size_t>> msg_index_;  // sender -> seq -> message record
  std::uint64_t data_total_ = 0;
  bool data_changed_ = false;
  Slot current_slot_ = 0;
};

}  // namespace

TrialLog run_trial(const SimConfig& config, std::uint64_t trial) {
  validate(config);
  TrialEngine engine(config, trial);
  return engine.run();
}

std::vector<TrialLog> run_experiment(const SimConfig& config, std::uint64_t trials,
                                     unsigned parallelism) {
  if (trials < 1) throw InputError("trials must be >= 1");
  validate(config);
  std::vector<TrialLog> logs(trials);
  const unsigned workers =
      static_cast<unsigned>(std::clamp<std::uint64_t>(parallelism, 1, trials));
  if (workers == 1) {
    for (std::uint64_t i = 0; i < trials; ++i) logs[i] = run_trial(config, i);
    return logs;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::uint64_t i = next++; i < trials; i = next++) {
          try {
            logs[i] = run_trial(config, i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return logs;
}

}  // namespace odc
