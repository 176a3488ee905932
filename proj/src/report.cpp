#include "odc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace odc {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::vector<double> metric_values(const MetricsSummary& m) {
  return {m.group_regret,
          m.group_regret_realized,
          static_cast<double>(m.data_messages),
          static_cast<double>(m.control_messages),
          static_cast<double>(m.comm_fast_fast),
          static_cast<double>(m.comm_fast_slow),
          static_cast<double>(m.comm_slow_slow),
          static_cast<double>(m.n_total),
          static_cast<double>(m.bound_comm),
          m.bound_regret_upper.value_or(std::nan("")),
          m.bound_regret_lower};
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "group_regret",   "group_regret_realized", "C_data",    "C_control",
      "comm_fast_fast", "comm_fast_slow",        "comm_slow_slow", "N_total",
      "bound_comm",     "bound_regret_upper",    "bound_regret_lower"};
  return names;
}

std::string num(double v) { return std::isnan(v) ? std::string() : format_double(v); }

Json json_num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[h & 0xf];
    h >>= 4;
  }
  return std::string(buf, 16);
}

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"config", "sweep", "trial", "protocol", "policy", "threshold", "delay"};
    c.insert(c.end(), metric_names().begin(), metric_names().end());
    return c;
  }();
  return cols;
}

void write_summary_header(std::ostream& out) {
  const auto& cols = summary_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_summary_row(std::ostream& out, const SimConfig& c, std::uint64_t trial,
                       const MetricsSummary& m) {
  out << csv_field(c.name) << ',' << csv_field(c.sweep_label) << ',' << trial << ','
      << to_string(c.protocol) << ',' << to_string(c.policy) << ',' << describe(c.threshold) << ','
      << c.delay;
  for (double v : metric_values(m)) out << ',' << num(v);
  out << '\n';
}

void Aggregator::add(const SimConfig& c, const MetricsSummary& m) {
  auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) { return g.name == c.name; });
  if (it == groups_.end()) {
    groups_.push_back({c.name, c.sweep_label, to_string(c.protocol), to_string(c.policy),
                       describe(c.threshold), std::vector<std::vector<double>>(metric_names().size())});
    it = std::prev(groups_.end());
  }
  const auto values = metric_values(m);
  for (std::size_t i = 0; i < values.size(); ++i) it->columns[i].push_back(values[i]);
}

void Aggregator::write(std::ostream& out) const {
  out << "config,sweep,protocol,policy,threshold,trials";
  for (const auto& n : metric_names()) out << ',' << n << "_mean," << n << "_std";
  out << '\n';
  for (const auto& g : groups_) {
    const std::size_t n = g.columns.empty() ? 0 : g.columns.front().size();
    out << csv_field(g.name) << ',' << csv_field(g.sweep) << ',' << g.protocol << ',' << g.policy << ','
        << g.threshold << ',' << n;
    for (const auto& col : g.columns) {
      const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      const double sd = col.size() > 1 ? std::sqrt(ss / static_cast<double>(col.size() - 1)) : 0.0;
      out << ',' << num(mean) << ',' << num(std::isnan(mean) ? mean : sd);
    }
    out << '\n';
  }
}

void write_timeseries_header(std::ostream& out) {
  out << "config,trial,slot,cumulative_group_regret,cumulative_C\n";
}

void write_timeseries(std::ostream& out, const SimConfig& c, const TrialLog& log,
                      const RegretSummary& regret, Slot stride) {
  if (stride < 1) stride = 1;
  std::size_t ri = 0;
  std::size_t ci = 0;
  double r = 0.0;
  std::uint64_t comm = 0;
  const std::string name = csv_field(c.name);
  for (Slot t = stride; ; t += stride) {
    if (t > log.horizon) t = log.horizon;
    while (ri < regret.cumulative.size() && regret.cumulative[ri].first <= t) r = regret.cumulative[ri++].second;
    while (ci < log.data_cumulative.size() && log.data_cumulative[ci].first <= t) {
      comm = log.data_cumulative[ci++].second;
    }
    out << name << ',' << log.trial << ',' << t << ',' << format_double(r) << ',' << comm << '\n';
    if (t == log.horizon) break;
  }
}

void write_events(std::ostream& out, const SimConfig& c, const TrialLog& log) {
  struct Ev {
    Slot t;
    int rank;
    std::size_t idx;
  };
  std::vector<Ev> order;
  order.reserve(log.pulls.size() + log.messages.size() + log.demands.size() + log.presence.size() +
                log.eliminations.size());
  for (std::size_t i = 0; i < log.presence.size(); ++i) order.push_back({log.presence[i].slot, 0, i});
  for (std::size_t i = 0; i < log.eliminations.size(); ++i) order.push_back({log.eliminations[i].slot, 1, i});
  for (std::size_t i = 0; i < log.pulls.size(); ++i) order.push_back({log.pulls[i].slot, 2, i});
  for (std::size_t i = 0; i < log.messages.size(); ++i) order.push_back({log.messages[i].send_slot, 3, i});
  for (std::size_t i = 0; i < log.demands.size(); ++i) order.push_back({log.demands[i].slot, 4, i});
  std::stable_sort(order.begin(), order.end(),
                   [](const Ev& a, const Ev& b) { return std::tie(a.t, a.rank) < std::tie(b.t, b.rank); });

  for (const auto& ev : order) {
    Json j{{"config", c.name}, {"trial", log.trial}, {"t", ev.t}};
    switch (ev.rank) {
      case 0: {
        const auto& p = log.presence[ev.idx];
        j["kind"] = p.join ? "join" : "depart";
        j["agent"] = p.agent;
        break;
      }
      case 1: {
        const auto& e = log.eliminations[ev.idx];
        j["kind"] = "elim";
        j["agent"] = e.agent;
        j["arm"] = e.arm;
        break;
      }
      case 2: {
        const auto& p = log.pulls[ev.idx];
        j["kind"] = "pull";
        j["agent"] = p.agent;
        j["arm"] = p.arm;
        j["reward"] = p.reward;
        break;
      }
      case 3: {
        const auto& m = log.messages[ev.idx];
        j["kind"] = "msg";
        j["type"] = to_string(m.kind);
        j["from"] = m.from;
        j["to"] = m.to;
        j["deliver"] = m.deliver_slot;
        if (m.kind == MessageKind::kData) {
          j["arms"] = m.arm_count;
          j["obs"] = m.obs_count;
          j["bits"] = m.bits;
          j["c"] = m.counter_after;
          j["f"] = m.threshold_after;
          j["reply"] = m.reply;
        } else if (m.kind == MessageKind::kElimination) {
          j["arm"] = m.arm;
        }
        j["delivered"] = m.delivered;
        break;
      }
      default: {
        const auto& d = log.demands[ev.idx];
        j["kind"] = "demand";
        j["agent"] = d.agent;
        j["peer"] = d.peer;
        j["buffered"] = d.buffered;
        j["f"] = d.threshold;
        break;
      }
    }
    out << j.dump() << '\n';
  }
}

void write_bounds(std::ostream& out, const SimConfig& c, const TrialLog& log, const BanditInstance& instance) {
  std::vector<std::vector<ArmId>> sets;
  const bool hetero = c.heterogeneous();
  if (hetero) sets = local_arm_sets(c, instance.num_arms());
  const BoundContext ctx{c.policy, c.alpha, c.delay, hetero ? &sets : nullptr};
  const auto comm = odc_comm_bound(log, instance, c.threshold, ctx);
  const auto t1 = regret_upper_bound(log, instance, ctx);
  const auto regret = group_regret(log, instance, ctx.local_sets);

  Json arms = Json::array();
  for (const auto& a : t1.arms) {
    arms.push_back({{"arm", a.arm},
                    {"gap", json_num(a.gap)},
                    {"budget", json_num(a.budget)},
                    {"tau", a.tau ? Json(*a.tau) : Json(nullptr)},
                    {"lead", json_num(a.lead)},
                    {"delay_term", json_num(a.delay_term)}});
  }
  Json j{{"config", c.name},
         {"trial", log.trial},
         {"decisions", log.decisions},
         {"C_data", log.total_data()},
         {"ibc_comm_exact", ibc_comm_exact(log.decisions)},
         {"c_values", comm.c_values},
         {"comm_bound", comm.bound},
         {"group_regret", json_num(regret.group_pseudo)},
         {"regret_upper", json_num(t1.bound)},
         {"regret_constant", json_num(t1.constant)},
         {"arms", std::move(arms)}};
  out << j.dump() << '\n';
}

}  // namespace odc
