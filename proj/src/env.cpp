#include "fairflow/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace fairflow {

TrainEnv::TrainEnv(const TrainConfig& cfg, const PolicyNet* frozen_bg,
                   std::uint64_t env_seed)
    : cfg_(cfg), frozen_bg_(frozen_bg), rng_(env_seed) {
  two_flow_ = cfg.strategy == Strategy::kA || cfg.strategy == Strategy::kB;
  augmented_ = cfg.strategy == Strategy::kB;
  if (two_flow_ && frozen_bg_ == nullptr) {
    throw std::invalid_argument(
        "TrainEnv: strategies a/b need a frozen base policy");
  }
  reward_cfg_.loss_coef = cfg.loss_coef;
  reward_cfg_.lambda = cfg.strategy == Strategy::kA ? cfg.lambda : 0.0;
  reward_cfg_.n_flows = two_flow_ ? 2 : 1;
  reset_episode();
}

void TrainEnv::reset_episode() {
  link_ = sample_training_link(rng_);
  sim_ = std::make_unique<BottleneckSim>(link_, rng_.next_u64());
  episode_total_mis_ = cfg_.episode_len;
  steps_in_episode_ = 0;
  episode_return_ = 0.0;
  ego_hist_.reset();
  bg_hist_.reset();

  const double mi = link_.mi_duration_s();
  if (two_flow_) {
    // Frozen incumbent occupies the link first; the ego joins after a random
    // stagger, mirroring the staggered evaluation protocol.
    bg_rate_ = rng_.uniform(0.3, 1.5) * link_.bandwidth_pps;
    ego_rate_ = rng_.uniform(0.3, 1.5) * link_.bandwidth_pps;
    bg_flow_ = sim_->add_flow(bg_rate_);
    ego_flow_ = sim_->add_flow(ego_rate_);
    const int stagger =
        std::min(rng_.uniform_int(cfg_.stagger_max_mis), cfg_.episode_len - 1);
    const bool mask_solo[2] = {true, false};
    for (int i = 0; i < stagger; ++i) {
      bg_rate_ = background_rate();
      sim_->set_rate(bg_flow_, bg_rate_);
      auto reports = sim_->step(mi, std::span<const bool>(mask_solo, 2));
      bg_hist_.on_report(reports[bg_flow_]);
    }
    episode_total_mis_ = cfg_.episode_len - stagger;
  } else {
    ego_rate_ = rng_.uniform(0.3, 1.5) * link_.bandwidth_pps;
    ego_flow_ = sim_->add_flow(ego_rate_);
    bg_flow_ = -1;
  }
  refresh_obs();
}

double TrainEnv::background_rate() {
  const Observation bg_obs = bg_hist_.observation(false, bg_rate_);
  const double mean = frozen_bg_->pi.forward(bg_obs);
  return clamp_rate(apply_rate_action(bg_rate_, mean, rate_cfg_), link_);
}

void TrainEnv::refresh_obs() { obs_ = ego_hist_.observation(augmented_, ego_rate_); }

TrainEnv::StepOut TrainEnv::step(double raw_action) {
  const double action = std::clamp(raw_action, -1.0, 1.0);
  ego_rate_ = clamp_rate(apply_rate_action(ego_rate_, action, rate_cfg_), link_);
  sim_->set_rate(ego_flow_, ego_rate_);
  if (two_flow_) {
    bg_rate_ = background_rate();
    sim_->set_rate(bg_flow_, bg_rate_);
  }
  const auto reports = sim_->step(link_.mi_duration_s());
  const MonitorReport& ego = reports[ego_flow_];
  ego_hist_.on_report(ego);
  if (two_flow_) bg_hist_.on_report(reports[bg_flow_]);

  // The latency term uses the flow's own queueing-delay estimate (mean minus
  // the min latency it has seen). Penalizing absolute latency would charge the
  // uncontrollable propagation delay on every delivering MI and make idling
  // outscore capacity-tracking on low-bandwidth links.
  const double queueing_s =
      ego.delivered_pkts
          ? ego.mean_latency_s - ego.min_latency_s_seen_so_far
          : 0.0;
  double reward = base_reward(link_.mbps(ego.throughput_pps), queueing_s,
                              ego.loss_fraction(), reward_cfg_);
  if (cfg_.strategy == Strategy::kA) {
    const double cap_pps =
        estimate_capacity(ego_rate_, ego_hist_.last_send_ratio());
    reward = shaped_reward_a(reward, link_.mbps(ego.throughput_pps),
                             link_.mbps(cap_pps), reward_cfg_);
  }
  episode_return_ += reward;

  StepOut out;
  out.reward = reward;
  out.done = ++steps_in_episode_ >= episode_total_mis_;
  if (out.done) {
    finished_returns_.push_back(episode_return_);
    reset_episode();
  } else {
    refresh_obs();
  }
  return out;
}

std::vector<double> TrainEnv::drain_episode_returns() {
  std::vector<double> out;
  out.swap(finished_returns_);
  return out;
}

}  // namespace fairflow
