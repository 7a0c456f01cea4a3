// Training loop plumbing: seeded determinism, env wiring, error paths.

#include "doctest.h"

#include "fairflow/env.hpp"
#include "fairflow/ppo.hpp"

using namespace fairflow;

TEST_CASE("fixed seed reproduces the checkpoint byte for byte") {
  TrainConfig cfg;
  cfg.total_steps = 4096;
  cfg.seed = 7;
  const TrainResult a = train(cfg);
  const TrainResult b = train(cfg);
  CHECK(checkpoint_to_json(a.checkpoint) == checkpoint_to_json(b.checkpoint));
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].step == b.curve[i].step);
    CHECK(a.curve[i].mean_episode_reward == b.curve[i].mean_episode_reward);
  }
  CHECK(a.checkpoint.steps_trained >= cfg.total_steps);
  CHECK(a.checkpoint.obs_dim() == kBaseObsDim);
}

TEST_CASE("strategies a/b refuse to start without a frozen baseline") {
  TrainConfig cfg;
  cfg.strategy = Strategy::kA;
  cfg.total_steps = 128;
  CHECK_THROWS_AS(train(cfg), std::invalid_argument);
  cfg.strategy = Strategy::kB;
  CHECK_THROWS_AS(train(cfg), std::invalid_argument);
}

TEST_CASE("single-flow env emits base observations and terminates episodes") {
  TrainConfig cfg;
  cfg.episode_len = 25;
  TrainEnv env(cfg, nullptr, 99);
  CHECK(env.obs().size() == kBaseObsDim);
  int dones = 0;
  for (int t = 0; t < 60; ++t) {
    const auto out = env.step(0.1);
    CHECK(std::isfinite(out.reward));
    if (out.done) ++dones;
    CHECK(env.obs().size() == kBaseObsDim);
  }
  CHECK(dones == 2);  // 60 steps over 25-MI episodes
  CHECK(env.drain_episode_returns().size() == 2);
}

TEST_CASE("two-flow env serves augmented observations for strategy B") {
  Rng rng(3);
  PolicyNet frozen = PolicyNet::init(kBaseObsDim, rng);
  TrainConfig cfg;
  cfg.strategy = Strategy::kB;
  cfg.episode_len = 30;
  cfg.stagger_max_mis = 10;
  TrainEnv env(cfg, &frozen, 17);
  CHECK(env.obs().size() == kAugObsDim);
  for (int t = 0; t < 40; ++t) {
    const auto out = env.step(-0.05);
    CHECK(std::isfinite(out.reward));
  }
}
