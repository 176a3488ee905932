#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "odc/types.hpp"

namespace odc {

enum class StreamPurpose : std::uint32_t {
  kInstance = 1,
  kReward = 2,
  kSchedule = 3,
  kGenerator = 4,  // test/property generators
};

struct StreamId {
  StreamPurpose purpose;
  std::uint64_t trial = 0;
  std::uint64_t index = 0;  // agent id, arm id, ...
};

/// Deterministic random stream. Each (seed, StreamId) pair maps to an
/// independent mt19937_64 whose seed is a SplitMix64 hash of the tuple, so
/// sequences never depend on the order in which other streams are consumed.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamId id);

  std::uint64_t next() { return engine_(); }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// True with probability p (p clamped to [0,1]). p == 1 always returns true.
  bool bernoulli(double p);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, StreamId id);

/// Bernoulli bandit: arm means indexed by ArmId.
class BanditInstance {
 public:
  explicit BanditInstance(std::vector<double> means);

  /// K means drawn uniformly from [low, high] using the given stream.
  static BanditInstance uniform_random(std::size_t k, double low, double high, RngStream& rng);

  std::size_t num_arms() const { return means_.size(); }
  std::span<const double> means() const { return means_; }
  double mean(ArmId arm) const;

  /// Lowest-index arm attaining the maximum mean.
  ArmId optimal_arm() const { return optimal_; }
  double optimal_mean() const { return means_[optimal_]; }

  /// Smallest strictly positive gap; 0 when every arm is optimal.
  double min_positive_gap() const;

  /// Best arm restricted to `arms` (ties to lowest index). `arms` must be non-empty.
  ArmId local_optimal_arm(std::span<const ArmId> arms) const;

  void check_arm(ArmId arm) const;

 private:
  std::vector<double> means_;
  ArmId optimal_ = 0;
};

/// Draws a reward in {0,1} for `arm`. Independent across calls.
int sample_reward(const BanditInstance& instance, ArmId arm, RngStream& rng);

/// mu(i*) - mu(arm); zero on optimal arms.
double suboptimality_gap(const BanditInstance& instance, ArmId arm);

}  // namespace odc
