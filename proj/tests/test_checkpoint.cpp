// Checkpoint round-trips and the three distinct load-error kinds.

#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <vector>

#include "json.hpp"

#include "fairflow/checkpoint.hpp"
#include "fairflow/scenarios.hpp"

using namespace fairflow;

namespace {

PolicyCheckpoint make_checkpoint(int obs_dim, Strategy strategy, std::uint64_t seed) {
  Rng rng(seed);
  PolicyCheckpoint ckpt;
  ckpt.net = PolicyNet::init(obs_dim, rng);
  ckpt.strategy = strategy;
  ckpt.lambda = strategy == Strategy::kA ? 2.0 : 0.0;
  ckpt.loss_coef = strategy == Strategy::kC ? 8000.0 : 2000.0;
  ckpt.train_seed = seed;
  ckpt.steps_trained = 12345;
  return ckpt;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/fairflow_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("save/load reproduces forward outputs bit-exactly") {
  const PolicyCheckpoint ckpt = make_checkpoint(30, Strategy::kBase, 5);
  TempFile f("roundtrip.json");
  save_checkpoint(ckpt, f.path);
  const PolicyCheckpoint loaded = load_checkpoint(f.path);

  CHECK(loaded.strategy == Strategy::kBase);
  CHECK(loaded.steps_trained == 12345);
  CHECK(loaded.net.log_std == ckpt.net.log_std);

  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> obs(30);
    for (double& v : obs) v = rng.uniform(-10.0, 10.0);
    const auto a = ckpt.net.forward(obs);
    const auto b = loaded.net.forward(obs);
    CHECK(a.action_mean == b.action_mean);  // bit-exact
    CHECK(a.value == b.value);
  }

  // Serialization itself is stable: save(load(x)) == save(x).
  CHECK(checkpoint_to_json(loaded) == checkpoint_to_json(ckpt));
}

TEST_CASE("truncated file raises the malformed-file error") {
  const PolicyCheckpoint ckpt = make_checkpoint(30, Strategy::kBase, 6);
  TempFile f("truncated.json");
  const std::string text = checkpoint_to_json(ckpt);
  std::ofstream(f.path) << text.substr(0, text.size() / 2);
  try {
    load_checkpoint(f.path);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::kMalformedFile);
  }
}

TEST_CASE("version mismatch is its own error") {
  PolicyCheckpoint ckpt = make_checkpoint(30, Strategy::kBase, 7);
  ckpt.format_version = 99;
  try {
    checkpoint_from_json(checkpoint_to_json(ckpt));
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::kVersionMismatch);
  }
}

TEST_CASE("weight-shape corruption is a dimension error") {
  const PolicyCheckpoint ckpt = make_checkpoint(30, Strategy::kBase, 8);
  std::string text = checkpoint_to_json(ckpt);
  auto j = nlohmann::ordered_json::parse(text);
  j["layer_sizes"] = std::vector<int>{30, 16, 16, 1};  // contradicts weights
  try {
    checkpoint_from_json(j.dump());
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::kDimensionMismatch);
  }
}

TEST_CASE("augmented checkpoint in a base scenario names both dims") {
  // Inconsistent pair: 32-dim weights with base strategy metadata.
  PolicyCheckpoint ckpt = make_checkpoint(32, Strategy::kBase, 9);
  try {
    PolicyController controller(ckpt);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::kDimensionMismatch);
    const std::string msg = e.what();
    CHECK(msg.find("32") != std::string::npos);
    CHECK(msg.find("30") != std::string::npos);
  }
}

TEST_CASE("strategy-B checkpoints carry 32-dim nets and metadata") {
  const PolicyCheckpoint ckpt = make_checkpoint(32, Strategy::kB, 10);
  const PolicyCheckpoint loaded = checkpoint_from_json(checkpoint_to_json(ckpt));
  CHECK(loaded.obs_dim() == 32);
  CHECK(loaded.augmented_obs());
  CHECK(loaded.strategy == Strategy::kB);
}
