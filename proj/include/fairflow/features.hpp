#pragma once
// Per-MI feature extraction and observation assembly. Each MI yields the
// (lat_grad, lat_ratio, send_ratio) triple; observations concatenate the last
// k = 10 triples, newest last, optionally followed by the two competition
// features of the state-augmentation strategy. All entries clip to [-10, 10].

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "fairflow/sim.hpp"

namespace fairflow {

inline constexpr int kHistoryLen = 10;
inline constexpr double kObsClip = 10.0;
inline constexpr int kBaseObsDim = 3 * kHistoryLen;   // 30
inline constexpr int kAugObsDim = kBaseObsDim + 2;    // 32

struct MiFeatures {
  double lat_grad = 0.0;    // latency slope across MIs, 1/s
  double lat_ratio = 1.0;   // mean latency / min latency seen
  double send_ratio = 1.0;  // delivered / sent
};

using Observation = std::vector<double>;

// Degenerate MIs (nothing sent or delivered) produce the neutral triple
// (0, 1, 1) so cold starts and mute phases never emit NaNs.
MiFeatures compute_mi_features(const MonitorReport& report,
                               const MonitorReport* prev_report,
                               double min_latency_s);

// Goodput-based capacity estimate: C_hat = send_rate * send_ratio.
inline double estimate_capacity(double send_rate_pps, double send_ratio) {
  return send_rate_pps * send_ratio;
}

// Competing-flow count inferred from throughput variability and loss:
// n_hat = clamp(1 + 4*cv + 20*mean_loss, 1, 8), cv = stddev/mean (population).
double estimate_competitors(std::span<const double> tput_window,
                            std::span<const double> loss_window);

// Ego throughput over the capacity estimate, clamped to [0, 1]; the estimate
// is floored at 1 pps so a dead link cannot divide by zero.
double tput_fraction(double ego_tput_pps, double capacity_estimate_pps);

class FeatureHistory {
 public:
  FeatureHistory() { reset(); }

  void reset();
  void on_report(const MonitorReport& report);

  const std::array<MiFeatures, kHistoryLen>& window() const { return hist_; }
  double last_send_ratio() const { return hist_.back().send_ratio; }
  double last_throughput_pps() const { return last_tput_pps_; }
  std::span<const double> tput_window() const {
    return {stats_tput_.data(), stats_len_};
  }
  std::span<const double> loss_window() const {
    return {stats_loss_.data(), stats_len_};
  }

  // send_rate_pps feeds the capacity estimate of the augmentation features;
  // ignored when augmented is false.
  Observation observation(bool augmented, double send_rate_pps) const;

 private:
  std::array<MiFeatures, kHistoryLen> hist_;  // oldest first
  std::optional<MonitorReport> prev_;
  double last_tput_pps_ = 0.0;
  // Throughput/loss windows for the competitor estimator. MIs with nothing
  // sent (mute phases) are excluded so the estimator sees sending behaviour.
  std::array<double, kHistoryLen> stats_tput_{};
  std::array<double, kHistoryLen> stats_loss_{};
  std::size_t stats_len_ = 0;
};

Observation build_observation(const FeatureHistory& hist, bool augmented,
                              double send_rate_pps = 0.0);

}  // namespace fairflow
