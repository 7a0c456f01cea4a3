#include "fairflow/cache.hpp"

#include <cstdio>
#include <sstream>

namespace fairflow {

namespace fs = std::filesystem;

std::string train_cache_key(const TrainConfig& cfg) {
  std::ostringstream ss;
  ss << "strategy=" << strategy_name(cfg.strategy) << ";lambda=" << cfg.lambda
     << ";loss_coef=" << cfg.loss_coef << ";steps=" << cfg.total_steps
     << ";seed=" << cfg.seed << ";episode_len=" << cfg.episode_len;
  const std::string s = ss.str();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return strategy_name(cfg.strategy) + "-" + buf;
}

fs::path train_cached(const TrainConfig& cfg, const fs::path& cache_dir) {
  const fs::path entry = cache_dir / train_cache_key(cfg);
  const fs::path ckpt_path = entry / "checkpoint.json";
  if (fs::exists(ckpt_path)) return ckpt_path;
  const TrainResult result = train(cfg);
  fs::create_directories(entry);
  write_curve_csv(result.curve, (entry / "curve.csv").string());
  // The checkpoint lands last so a half-written entry is never picked up.
  save_checkpoint(result.checkpoint, (entry / "checkpoint.json.tmp").string());
  fs::rename(entry / "checkpoint.json.tmp", ckpt_path);
  return ckpt_path;
}

}  // namespace fairflow
