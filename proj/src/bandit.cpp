#include "odc/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace odc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, StreamId id) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(id.purpose));
  h = splitmix64(h ^ id.trial);
  h = splitmix64(h ^ id.index);
  return h;
}

RngStream::RngStream(std::uint64_t seed, StreamId id) : engine_(mix_seed(seed, id)) {}

bool RngStream::bernoulli(double p) {
  if (!(p > 0.0)) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

BanditInstance::BanditInstance(std::vector<double> means) : means_(std::move(means)) {
  if (means_.empty()) throw InputError("bandit instance needs at least one arm");
  for (std::size_t i = 0; i < means_.size(); ++i) {
    const double m = means_[i];
    if (!(m >= 0.0 && m <= 1.0)) {
      throw InputError("arm " + std::to_string(i) + " mean outside [0,1]");
    }
    if (m > means_[optimal_]) optimal_ = static_cast<ArmId>(i);
  }
}

BanditInstance BanditInstance::uniform_random(std::size_t k, double low, double high,
                                              RngStream& rng) {
  if (k == 0) throw InputError("uniform draw needs k >= 1");
  if (!(low >= 0.0 && high <= 1.0 && low <= high)) {
    throw InputError("uniform draw range must satisfy 0 <= low <= high <= 1");
  }
  std::vector<double> means(k);
  for (auto& m : means) m = low + (high - low) * rng.uniform();
  return BanditInstance(std::move(means));
}

void BanditInstance::check_arm(ArmId arm) const {
  if (arm >= means_.size()) {
    throw InputError("arm index " + std::to_string(arm) + " out of range (K=" +
                     std::to_string(means_.size()) + ")");
  }
}

double BanditInstance::mean(ArmId arm) const {
  check_arm(arm);
  return means_[arm];
}

double BanditInstance::min_positive_gap() const {
  const double best = optimal_mean();
  double gap = std::numeric_limits<double>::infinity();
  for (double m : means_) {
    const double g = best - m;
    if (g > 0.0) gap = std::min(gap, g);
  }
  return std::isinf(gap) ? 0.0 : gap;
}

ArmId BanditInstance::local_optimal_arm(std::span<const ArmId> arms) const {
  if (arms.empty()) throw InputError("local arm set is empty");
  ArmId best = arms.front();
  check_arm(best);
  for (ArmId a : arms) {
    check_arm(a);
    if (means_[a] > means_[best] || (means_[a] == means_[best] && a < best)) best = a;
  }
  return best;
}

int sample_reward(const BanditInstance& instance, ArmId arm, RngStream& rng) {
  return rng.bernoulli(instance.mean(arm)) ? 1 : 0;
}

double suboptimality_gap(const BanditInstance& instance, ArmId arm) {
  return instance.optimal_mean() - instance.mean(arm);
}

}  // namespace odc
