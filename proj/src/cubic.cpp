#include "fairflow/cubic.hpp"

#include <algorithm>
#include <cmath>

namespace fairflow {

double cubic_window(const CubicState& state, double t_s) {
  const double k = std::cbrt(state.w_max * (1.0 - state.beta) / state.c);
  const double d = t_s - k;
  return std::max(kCubicMinWindow, state.c * d * d * d + state.w_max);
}

CubicState cubic_on_loss(const CubicState& state) {
  CubicState next = state;
  next.w_max = state.w;
  next.w = std::max(kCubicMinWindow, state.beta * state.w);
  next.t_since_loss_s = 0.0;
  return next;
}

CubicMiDriver::CubicMiDriver(const LinkConfig& link, double initial_window)
    : base_rtt_s_(2.0 * link.one_way_latency_s) {
  state_.w = initial_window;
  state_.w_max = initial_window;
  state_.t_since_loss_s = 0.0;
  state_.rtt_s = base_rtt_s_;
}

void CubicMiDriver::on_report(const MonitorReport& report) {
  if (report.lost_pkts > 0) {
    state_ = cubic_on_loss(state_);
  } else {
    state_.t_since_loss_s += report.duration_s;
  }
  state_.w = cubic_window(state_, state_.t_since_loss_s);
  // Measured RTT: last MI's mean one-way latency (propagation + queueing)
  // plus the return path. Falls back to the base RTT in silent MIs.
  state_.rtt_s = report.delivered_pkts > 0
                     ? report.mean_latency_s + base_rtt_s_ / 2.0
                     : base_rtt_s_;
}

}  // namespace fairflow
