#pragma once
// Portable policy checkpoints: JSON with nested decimal-float weight arrays.
// Save/load round-trips forward outputs bit-exactly. Loading validates the
// format version, observation dimension and layer shapes, each with its own
// error kind so callers can tell a truncated file from a stale one.

#include <stdexcept>
#include <string>

#include "fairflow/mlp.hpp"

namespace fairflow {

inline constexpr int kCheckpointFormatVersion = 1;

enum class Strategy { kBase, kA, kB, kC };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);  // throws on unknown

// Policy and value nets share layer sizes but not weights; the Gaussian
// action head keeps a state-independent log standard deviation.
struct PolicyNet {
  Mlp pi;  // tanh-squashed action mean
  Mlp v;   // linear state value
  double log_std = -0.5;

  int obs_dim() const { return pi.input_dim(); }

  struct Output {
    double action_mean;
    double value;
  };
  Output forward(std::span<const double> obs) const {
    return {pi.forward(obs), v.forward(obs)};
  }

  static PolicyNet init(int obs_dim, Rng& rng);
};

struct PolicyCheckpoint {
  int format_version = kCheckpointFormatVersion;
  PolicyNet net;
  Strategy strategy = Strategy::kBase;
  double lambda = 0.0;
  double loss_coef = 2000.0;
  std::uint64_t train_seed = 0;
  long long steps_trained = 0;

  int obs_dim() const { return net.obs_dim(); }
  bool augmented_obs() const { return strategy == Strategy::kB; }
};

struct CheckpointError : std::runtime_error {
  enum class Kind { kMalformedFile, kVersionMismatch, kDimensionMismatch };
  CheckpointError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path);
PolicyCheckpoint load_checkpoint(const std::string& path);

std::string checkpoint_to_json(const PolicyCheckpoint& ckpt);
PolicyCheckpoint checkpoint_from_json(const std::string& text);

}  // namespace fairflow
