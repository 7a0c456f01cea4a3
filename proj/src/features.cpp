#include "fairflow/features.hpp"

#include <algorithm>
#include <cmath>

namespace fairflow {

MiFeatures compute_mi_features(const MonitorReport& report,
                               const MonitorReport* prev_report,
                               double min_latency_s) {
  MiFeatures f;
  const bool delivered = report.delivered_pkts > 0;
  if (delivered && prev_report && prev_report->delivered_pkts > 0 &&
      report.duration_s > 0.0) {
    f.lat_grad =
        (report.mean_latency_s - prev_report->mean_latency_s) / report.duration_s;
  }
  if (delivered && min_latency_s > 0.0) {
    f.lat_ratio = report.mean_latency_s / min_latency_s;
  }
  if (report.sent_pkts > 0) {
    f.send_ratio = static_cast<double>(report.delivered_pkts) /
                   static_cast<double>(report.sent_pkts);
  }
  return f;
}

double estimate_competitors(std::span<const double> tput_window,
                            std::span<const double> loss_window) {
  double cv = 0.0;
  if (!tput_window.empty()) {
    double mean = 0.0;
    for (double v : tput_window) mean += v;
    mean /= static_cast<double>(tput_window.size());
    if (mean > 0.0) {
      double var = 0.0;
      for (double v : tput_window) var += (v - mean) * (v - mean);
      var /= static_cast<double>(tput_window.size());
      cv = std::sqrt(var) / mean;
    }
  }
  double mean_loss = 0.0;
  if (!loss_window.empty()) {
    for (double v : loss_window) mean_loss += v;
    mean_loss /= static_cast<double>(loss_window.size());
  }
  return std::clamp(1.0 + 4.0 * cv + 20.0 * mean_loss, 1.0, 8.0);
}

double tput_fraction(double ego_tput_pps, double capacity_estimate_pps) {
  const double denom = std::max(capacity_estimate_pps, 1.0);
  return std::clamp(ego_tput_pps / denom, 0.0, 1.0);
}

void FeatureHistory::reset() {
  hist_.fill(MiFeatures{});
  prev_.reset();
  last_tput_pps_ = 0.0;
  stats_len_ = 0;
}

void FeatureHistory::on_report(const MonitorReport& report) {
  const MiFeatures f = compute_mi_features(
      report, prev_ ? &*prev_ : nullptr, report.min_latency_s_seen_so_far);
  std::rotate(hist_.begin(), hist_.begin() + 1, hist_.end());
  hist_.back() = f;
  prev_ = report;
  if (report.sent_pkts > 0) {
    last_tput_pps_ = report.throughput_pps;
    if (stats_len_ == kHistoryLen) {
      std::rotate(stats_tput_.begin(), stats_tput_.begin() + 1, stats_tput_.end());
      std::rotate(stats_loss_.begin(), stats_loss_.begin() + 1, stats_loss_.end());
      --stats_len_;
    }
    stats_tput_[stats_len_] = report.throughput_pps;
    stats_loss_[stats_len_] = report.loss_fraction();
    ++stats_len_;
  }
}

Observation FeatureHistory::observation(bool augmented,
                                        double send_rate_pps) const {
  Observation obs;
  obs.reserve(augmented ? kAugObsDim : kBaseObsDim);
  for (const MiFeatures& f : hist_) {
    obs.push_back(f.lat_grad);
    obs.push_back(f.lat_ratio);
    obs.push_back(f.send_ratio);
  }
  if (augmented) {
    obs.push_back(estimate_competitors(tput_window(), loss_window()));
    const double cap = estimate_capacity(send_rate_pps, last_send_ratio());
    obs.push_back(tput_fraction(last_tput_pps_, cap));
  }
  for (double& v : obs) v = std::clamp(v, -kObsClip, kObsClip);
  return obs;
}

Observation build_observation(const FeatureHistory& hist, bool augmented,
                              double send_rate_pps) {
  return hist.observation(augmented, send_rate_pps);
}

}  // namespace fairflow
