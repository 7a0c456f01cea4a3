#pragma once
// Synchronous PPO with GAE. The clipped-surrogate gradients are accumulated
// by hand through the policy and value MLPs; parameters step through Adam
// with global gradient-norm clipping. All randomness (environments, action
// sampling, minibatch shuffles) comes from streams derived from one seed, so
// a fixed seed reproduces the training trajectory exactly.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairflow/checkpoint.hpp"
#include "fairflow/mlp.hpp"
#include "fairflow/rng.hpp"

namespace fairflow {

struct TrainConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double lr = 3e-4;
  double adam_eps = 1e-5;
  int n_envs = 4;
  long long total_steps = 1'600'000;
  int episode_len = 400;  // monitor intervals
  int horizon = 1024;     // steps per env per update
  int minibatch_size = 256;
  int epochs = 4;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
  double grad_clip = 0.5;
  Strategy strategy = Strategy::kBase;
  double lambda = 0.0;       // strategy A
  double loss_coef = 2000.0; // strategy C raises this
  std::uint64_t seed = 42;
  std::string frozen_base_path;  // required for strategies A and B
  int stagger_max_mis = 100;     // training stagger drawn from [0, this]
};

struct RolloutBatch {
  int obs_dim = 0;
  std::vector<double> obs;      // row-major, size() * obs_dim
  std::vector<double> actions;  // raw Gaussian samples (pre-clamp)
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> old_logp;
  std::vector<std::uint8_t> dones;  // 1 = episode ended at this step
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return rewards.size(); }
  std::span<const double> obs_row(std::size_t i) const {
    return {obs.data() + i * obs_dim, static_cast<std::size_t>(obs_dim)};
  }
  void clear();
};

// delta_t = r_t + gamma*v_{t+1} - v_t; A_t = delta_t + gamma*lambda*A_{t+1},
// accumulation cut at episode boundaries; returns_t = A_t + v_t.
void gae_advantages(std::span<const double> rewards,
                    std::span<const double> values,
                    std::span<const std::uint8_t> dones,
                    double bootstrap_value, double gamma, double gae_lambda,
                    std::span<double> advantages, std::span<double> returns);

double gaussian_logp(double action, double mean, double log_std);

struct PpoGrads {
  MlpGrad pi;
  MlpGrad v;
  double log_std = 0.0;

  static PpoGrads zeros_like(const PolicyNet& net);
  void zero();
  double global_norm() const;
  void scale(double s);
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

struct PpoSettings {
  double clip_eps = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
};

// Mean PPO loss over the given sample indices plus its gradient. Pure in the
// parameters; advantages must already be normalized. Returns the total loss
// (policy + vf_coef*value - ent_coef*entropy).
double ppo_loss_and_grad(const PolicyNet& net, const RolloutBatch& batch,
                         std::span<const std::size_t> indices,
                         const PpoSettings& settings, PpoGrads& grads,
                         PpoStats* stats = nullptr);

struct AdamState {
  PpoGrads m;
  PpoGrads v;
  long long t = 0;
  static AdamState zeros_like(const PolicyNet& net);
};

void adam_step(PolicyNet& net, const PpoGrads& grads, AdamState& state,
               double lr, double eps);

struct NonFiniteLossError : std::runtime_error {
  NonFiniteLossError(std::size_t minibatch_index, const std::string& msg)
      : std::runtime_error(msg), minibatch_index(minibatch_index) {}
  std::size_t minibatch_index;
};

// One PPO update over the batch: per-update advantage normalization, then
// `epochs` passes of shuffled minibatches. Throws NonFiniteLossError with the
// offending minibatch index if a loss goes non-finite.
PpoStats ppo_update(PolicyNet& net, AdamState& adam, RolloutBatch& batch,
                    const TrainConfig& cfg, Rng& shuffle_rng);

struct CurvePoint {
  long long step = 0;
  double mean_episode_reward = 0.0;
};

struct TrainResult {
  PolicyCheckpoint checkpoint;
  std::vector<CurvePoint> curve;  // one row per PPO update
};

// Full training run per the config. Strategies A/B load the frozen base
// checkpoint and train against it on a shared bottleneck; base/C train
// single-flow on links sampled from the training distribution.
TrainResult train(const TrainConfig& cfg);

void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::string& path);

}  // namespace fairflow
