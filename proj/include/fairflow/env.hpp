#pragma once
// Training environments for the PPO loop. One environment owns one simulator
// instance, its feature history and its RNG stream; workers never share
// mutable state. base/C train a single flow on freshly sampled links; A/B
// train the ego against a frozen incumbent on a shared bottleneck with a
// random stagger.

#include <memory>
#include <optional>

#include "fairflow/features.hpp"
#include "fairflow/ppo.hpp"
#include "fairflow/rewards.hpp"
#include "fairflow/sim.hpp"

namespace fairflow {

// Send rate ceiling as a multiple of link bandwidth; keeps the packet loop
// bounded when an untrained policy keeps pushing the rate up.
inline constexpr double kMaxRateFactor = 8.0;

inline double clamp_rate(double rate_pps, const LinkConfig& link) {
  const double cap = kMaxRateFactor * link.bandwidth_pps;
  return rate_pps > cap ? cap : rate_pps;
}

class TrainEnv {
 public:
  // frozen_bg is required (non-null) for strategies A and B.
  TrainEnv(const TrainConfig& cfg, const PolicyNet* frozen_bg,
           std::uint64_t env_seed);

  int obs_dim() const { return augmented_ ? kAugObsDim : kBaseObsDim; }
  const Observation& obs() const { return obs_; }

  struct StepOut {
    double reward = 0.0;
    bool done = false;
  };
  // Raw policy action; clamped to [-1, 1] before the rate update. Resets
  // automatically at episode end, so obs() is always valid.
  StepOut step(double raw_action);

  std::vector<double> drain_episode_returns();

 private:
  void reset_episode();
  void refresh_obs();
  double background_rate();

  TrainConfig cfg_;
  const PolicyNet* frozen_bg_;
  bool two_flow_;
  bool augmented_;
  Rng rng_;
  RewardConfig reward_cfg_;
  RateActionConfig rate_cfg_;

  std::unique_ptr<BottleneckSim> sim_;
  LinkConfig link_;
  int ego_flow_ = 0;
  int bg_flow_ = -1;
  double ego_rate_ = kMinRatePps;
  double bg_rate_ = kMinRatePps;
  FeatureHistory ego_hist_;
  FeatureHistory bg_hist_;
  Observation obs_;
  int steps_in_episode_ = 0;
  int episode_total_mis_ = 0;
  double episode_return_ = 0.0;
  std::vector<double> finished_returns_;
};

}  // namespace fairflow
