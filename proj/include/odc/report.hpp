#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "odc/config.hpp"
#include "odc/metrics.hpp"

namespace odc {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// FNV-1a 64-bit over `bytes`, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

const std::vector<std::string>& summary_columns();
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SimConfig& config, std::uint64_t trial,
                       const MetricsSummary& m);

/// mean and sample std per numeric summary column, one row per config.
class Aggregator {
 public:
  void add(const SimConfig& config, const MetricsSummary& m);
  void write(std::ostream& out) const;

 private:
  struct Group {
    std::string name, sweep, protocol, policy, threshold;
    std::vector<std::vector<double>> columns;  // per metric, per trial
  };
  std::vector<Group> groups_;
};

void write_timeseries_header(std::ostream& out);
/// Rows at every `stride`-th slot and at the horizon.
void write_timeseries(std::ostream& out, const SimConfig& config, const TrialLog& log,
                      const RegretSummary& regret, Slot stride);

/// One JSON object per line: presence, elimination, pull, message and demand
/// events in slot order.
void write_events(std::ostream& out, const SimConfig& config, const TrialLog& log);

/// One line per trial with the instrumented bound terms.
void write_bounds(std::ostream& out, const SimConfig& config, const TrialLog& log,
                  const BanditInstance& instance);

}  // namespace odc
