#pragma once
// Reward functions. Base reward is 10*tput - 1000*lat - 2000*loss with
// throughput in Mbps, latency in seconds and loss as a fraction; the loss
// coefficient is the knob the loss-sensitivity strategy turns. The shaping
// strategy subtracts a hinge penalty above the estimated fair share.

#include <algorithm>

namespace fairflow {

struct RewardConfig {
  double tput_coef = 10.0;    // per Mbps
  double lat_coef = 1000.0;   // per second
  double loss_coef = 2000.0;  // per unit loss fraction
  double lambda = 0.0;        // fair-share penalty weight; 0 disables shaping
  int n_flows = 1;            // N in the fair-share threshold
};

inline double base_reward(double tput_mbps, double mean_latency_s,
                          double loss_fraction, const RewardConfig& cfg) {
  return cfg.tput_coef * tput_mbps - cfg.lat_coef * mean_latency_s -
         cfg.loss_coef * loss_fraction;
}

// r' = r - lambda * max(0, ego_tput - C_hat/N). Uses the ego's own capacity
// estimate; no inter-flow communication.
inline double shaped_reward_a(double r, double ego_tput_mbps,
                              double capacity_estimate_mbps,
                              const RewardConfig& cfg) {
  const double fair_share = capacity_estimate_mbps / static_cast<double>(cfg.n_flows);
  return r - cfg.lambda * std::max(0.0, ego_tput_mbps - fair_share);
}

}  // namespace fairflow
