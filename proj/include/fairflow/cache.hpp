#pragma once
// Checkpoint cache keyed by (strategy, params, steps, seed): sweeps and the
// acceptance suite retrain only what changed.

#include <filesystem>
#include <string>

#include "fairflow/ppo.hpp"

namespace fairflow {

std::string train_cache_key(const TrainConfig& cfg);

// Returns the cached checkpoint path, training it first if absent. The cache
// entry also holds the training-curve CSV.
std::filesystem::path train_cached(const TrainConfig& cfg,
                                   const std::filesystem::path& cache_dir);

}  // namespace fairflow
