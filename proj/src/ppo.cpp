#include "fairflow/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "fairflow/env.hpp"

namespace fairflow {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)
}

void RolloutBatch::clear() {
  obs.clear();
  actions.clear();
  rewards.clear();
  values.clear();
  old_logp.clear();
  dones.clear();
  advantages.clear();
  returns.clear();
}

void gae_advantages(std::span<const double> rewards,
                    std::span<const double> values,
                    std::span<const std::uint8_t> dones,
                    double bootstrap_value, double gamma, double gae_lambda,
                    std::span<double> advantages, std::span<double> returns) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n || advantages.size() != n ||
      returns.size() != n) {
    throw std::invalid_argument("gae_advantages: length mismatch");
  }
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * not_done - values[i];
    next_adv = delta + gamma * gae_lambda * not_done * next_adv;
    advantages[i] = next_adv;
    returns[i] = next_adv + values[i];
    next_value = values[i];
  }
}

double gaussian_logp(double action, double mean, double log_std) {
  const double z = (action - mean) / std::exp(log_std);
  return -0.5 * z * z - log_std - kHalfLog2Pi;
}

PpoGrads PpoGrads::zeros_like(const PolicyNet& net) {
  PpoGrads g;
  g.pi = MlpGrad::zeros_like(net.pi);
  g.v = MlpGrad::zeros_like(net.v);
  g.log_std = 0.0;
  return g;
}

void PpoGrads::zero() {
  pi.zero();
  v.zero();
  log_std = 0.0;
}

double PpoGrads::global_norm() const {
  double s = log_std * log_std;
  for (const auto& layer : pi.w)
    for (double g : layer) s += g * g;
  for (const auto& layer : pi.b)
    for (double g : layer) s += g * g;
  for (const auto& layer : v.w)
    for (double g : layer) s += g * g;
  for (const auto& layer : v.b)
    for (double g : layer) s += g * g;
  return std::sqrt(s);
}

void PpoGrads::scale(double s) {
  for (auto& layer : pi.w)
    for (double& g : layer) g *= s;
  for (auto& layer : pi.b)
    for (double& g : layer) g *= s;
  for (auto& layer : v.w)
    for (double& g : layer) g *= s;
  for (auto& layer : v.b)
    for (double& g : layer) g *= s;
  log_std *= s;
}

double ppo_loss_and_grad(const PolicyNet& net, const RolloutBatch& batch,
                         std::span<const std::size_t> indices,
                         const PpoSettings& settings, PpoGrads& grads,
                         PpoStats* stats) {
  const double n = static_cast<double>(indices.size());
  const double sigma = std::exp(net.log_std);
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clipped = 0.0;
  Mlp::Tape pi_tape, v_tape;

  for (std::size_t idx : indices) {
    const auto obs = batch.obs_row(idx);
    const double mean = net.pi.forward(obs, pi_tape);
    const double value = net.v.forward(obs, v_tape);
    const double adv = batch.advantages[idx];

    const double z = (batch.actions[idx] - mean) / sigma;
    const double logp = -0.5 * z * z - net.log_std - kHalfLog2Pi;
    const double ratio = std::exp(logp - batch.old_logp[idx]);
    const double lo = 1.0 - settings.clip_eps;
    const double hi = 1.0 + settings.clip_eps;
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, lo, hi) * adv;

    double d_ratio = 0.0;
    if (surr1 <= surr2) {
      policy_loss += -surr1;
      d_ratio = -adv / n;
    } else {
      // clipped branch selected: the clamp is saturated, gradient is zero
      policy_loss += -surr2;
      clipped += 1.0;
    }
    if (d_ratio != 0.0) {
      const double d_logp = d_ratio * ratio;
      const double d_mean = d_logp * z / sigma;
      grads.log_std += d_logp * (z * z - 1.0);
      net.pi.backward(pi_tape, d_mean, grads.pi);
    }

    const double verr = value - batch.returns[idx];
    value_loss += verr * verr;
    net.v.backward(v_tape, settings.vf_coef * 2.0 * verr / n, grads.v);
  }

  policy_loss /= n;
  value_loss /= n;
  const double entropy = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) +
                         net.log_std;
  grads.log_std -= settings.ent_coef;

  if (stats) {
    stats->policy_loss = policy_loss;
    stats->value_loss = value_loss;
    stats->entropy = entropy;
    stats->clip_fraction = clipped / n;
  }
  return policy_loss + settings.vf_coef * value_loss - settings.ent_coef * entropy;
}

AdamState AdamState::zeros_like(const PolicyNet& net) {
  AdamState s;
  s.m = PpoGrads::zeros_like(net);
  s.v = PpoGrads::zeros_like(net);
  s.t = 0;
  return s;
}

namespace {

void adam_apply(std::vector<double>& param, const std::vector<double>& grad,
                std::vector<double>& m, std::vector<double>& v, double lr_t,
                double eps) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = 0.9 * m[i] + 0.1 * grad[i];
    v[i] = 0.999 * v[i] + 0.001 * grad[i] * grad[i];
    param[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps);
  }
}

}  // namespace

void adam_step(PolicyNet& net, const PpoGrads& grads, AdamState& state,
               double lr, double eps) {
  ++state.t;
  const double t = static_cast<double>(state.t);
  // Fold both bias corrections into the step size.
  const double lr_t = lr * std::sqrt(1.0 - std::pow(0.999, t)) /
                      (1.0 - std::pow(0.9, t));
  for (std::size_t l = 0; l < net.pi.w.size(); ++l) {
    adam_apply(net.pi.w[l], grads.pi.w[l], state.m.pi.w[l], state.v.pi.w[l], lr_t, eps);
    adam_apply(net.pi.b[l], grads.pi.b[l], state.m.pi.b[l], state.v.pi.b[l], lr_t, eps);
  }
  for (std::size_t l = 0; l < net.v.w.size(); ++l) {
    adam_apply(net.v.w[l], grads.v.w[l], state.m.v.w[l], state.v.v.w[l], lr_t, eps);
    adam_apply(net.v.b[l], grads.v.b[l], state.m.v.b[l], state.v.v.b[l], lr_t, eps);
  }
  state.m.log_std = 0.9 * state.m.log_std + 0.1 * grads.log_std;
  state.v.log_std = 0.999 * state.v.log_std + 0.001 * grads.log_std * grads.log_std;
  net.log_std -= lr_t * state.m.log_std / (std::sqrt(state.v.log_std) + eps);
}

PpoStats ppo_update(PolicyNet& net, AdamState& adam, RolloutBatch& batch,
                    const TrainConfig& cfg, Rng& shuffle_rng) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("ppo_update: empty batch");

  // Normalize advantages once per update.
  double mean = std::accumulate(batch.advantages.begin(), batch.advantages.end(), 0.0) /
                static_cast<double>(n);
  double var = 0.0;
  for (double a : batch.advantages) var += (a - mean) * (a - mean);
  const double inv_std = 1.0 / (std::sqrt(var / static_cast<double>(n)) + 1e-8);
  for (double& a : batch.advantages) a = (a - mean) * inv_std;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  PpoSettings settings{cfg.clip_eps, cfg.vf_coef, cfg.ent_coef};
  PpoGrads grads = PpoGrads::zeros_like(net);
  PpoStats last{};
  std::size_t minibatch_index = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the trainer's stream keeps runs reproducible.
    for (std::size_t i = n - 1; i > 0; --i) {
      auto j = static_cast<std::size_t>(shuffle_rng.u01() * static_cast<double>(i + 1));
      if (j > i) j = i;
      std::swap(order[i], order[j]);
    }
    for (std::size_t start = 0; start < n; start += cfg.minibatch_size) {
      const std::size_t stop = std::min(n, start + cfg.minibatch_size);
      grads.zero();
      const double loss = ppo_loss_and_grad(
          net, batch, std::span<const std::size_t>(order).subspan(start, stop - start),
          settings, grads, &last);
      if (!std::isfinite(loss)) {
        throw NonFiniteLossError(
            minibatch_index,
            "ppo_update: non-finite loss in minibatch " +
                std::to_string(minibatch_index));
      }
      const double norm = grads.global_norm();
      if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) {
        grads.scale(cfg.grad_clip / norm);
      }
      adam_step(net, grads, adam, cfg.lr, cfg.adam_eps);
      ++minibatch_index;
    }
  }
  return last;
}

TrainResult train(const TrainConfig& cfg) {
  if (cfg.total_steps <= 0) throw std::invalid_argument("train: total_steps must be > 0");
  const bool needs_frozen =
      cfg.strategy == Strategy::kA || cfg.strategy == Strategy::kB;
  PolicyCheckpoint frozen;
  if (needs_frozen) {
    if (cfg.frozen_base_path.empty()) {
      throw std::invalid_argument(
          "train: strategies a/b require a frozen base checkpoint path");
    }
    frozen = load_checkpoint(cfg.frozen_base_path);
    if (frozen.obs_dim() != kBaseObsDim) {
      throw CheckpointError(
          CheckpointError::Kind::kDimensionMismatch,
          "frozen base checkpoint obs_dim " + std::to_string(frozen.obs_dim()) +
              ", expected " + std::to_string(kBaseObsDim));
    }
  }

  const int obs_dim = cfg.strategy == Strategy::kB ? kAugObsDim : kBaseObsDim;
  Rng init_rng(derive_seed(cfg.seed, 0));
  PolicyNet net = PolicyNet::init(obs_dim, init_rng);
  AdamState adam = AdamState::zeros_like(net);
  Rng shuffle_rng(derive_seed(cfg.seed, 1));

  struct Worker {
    std::unique_ptr<TrainEnv> env;
    Rng sample_rng;
  };
  std::vector<Worker> workers;
  workers.reserve(cfg.n_envs);
  for (int i = 0; i < cfg.n_envs; ++i) {
    workers.push_back({std::make_unique<TrainEnv>(
                           cfg, needs_frozen ? &frozen.net : nullptr,
                           derive_seed(cfg.seed, 100 + i)),
                       Rng(derive_seed(cfg.seed, 200 + i))});
  }

  RolloutBatch batch;
  batch.obs_dim = obs_dim;
  std::vector<CurvePoint> curve;
  long long steps_done = 0;
  double last_curve_value = 0.0;

  while (steps_done < cfg.total_steps) {
    batch.clear();
    std::vector<double> env_advs, env_rets;
    for (auto& wk : workers) {
      const std::size_t seg_start = batch.size();
      const double sigma = std::exp(net.log_std);
      for (int t = 0; t < cfg.horizon; ++t) {
        const Observation& obs = wk.env->obs();
        const auto out = net.forward(obs);
        const double action = out.action_mean + sigma * wk.sample_rng.normal();
        batch.obs.insert(batch.obs.end(), obs.begin(), obs.end());
        batch.actions.push_back(action);
        batch.values.push_back(out.value);
        batch.old_logp.push_back(gaussian_logp(action, out.action_mean, net.log_std));
        const auto step = wk.env->step(action);
        batch.rewards.push_back(step.reward);
        batch.dones.push_back(step.done ? 1 : 0);
      }
      const double bootstrap = net.v.forward(wk.env->obs());
      const std::size_t seg_len = batch.size() - seg_start;
      env_advs.assign(seg_len, 0.0);
      env_rets.assign(seg_len, 0.0);
      gae_advantages(
          std::span<const double>(batch.rewards).subspan(seg_start, seg_len),
          std::span<const double>(batch.values).subspan(seg_start, seg_len),
          std::span<const std::uint8_t>(batch.dones).subspan(seg_start, seg_len),
          bootstrap, cfg.gamma, cfg.gae_lambda, env_advs, env_rets);
      batch.advantages.insert(batch.advantages.end(), env_advs.begin(), env_advs.end());
      batch.returns.insert(batch.returns.end(), env_rets.begin(), env_rets.end());
    }

    ppo_update(net, adam, batch, cfg, shuffle_rng);
    steps_done += static_cast<long long>(batch.size());

    std::vector<double> finished;
    for (auto& wk : workers) {
      auto r = wk.env->drain_episode_returns();
      finished.insert(finished.end(), r.begin(), r.end());
    }
    if (!finished.empty()) {
      last_curve_value = std::accumulate(finished.begin(), finished.end(), 0.0) /
                         static_cast<double>(finished.size());
    }
    curve.push_back({steps_done, last_curve_value});
  }

  TrainResult result;
  result.checkpoint.format_version = kCheckpointFormatVersion;
  result.checkpoint.net = std::move(net);
  result.checkpoint.strategy = cfg.strategy;
  result.checkpoint.lambda = cfg.strategy == Strategy::kA ? cfg.lambda : 0.0;
  result.checkpoint.loss_coef = cfg.loss_coef;
  result.checkpoint.train_seed = cfg.seed;
  result.checkpoint.steps_trained = steps_done;
  result.curve = std::move(curve);
  return result;
}

void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "step,mean_episode_reward\n";
  for (const auto& p : curve) {
    out << p.step << ',' << p.mean_episode_reward << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace fairflow
