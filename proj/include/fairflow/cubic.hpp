#pragma once
// Fluid-model TCP CUBIC: W(t) = C*(t-K)^3 + w_max with the standard constants
// C = 0.4, beta = 0.7. The controller runs at MI granularity: one loss event
// per MI at most, window converted to a rate through the measured RTT.

#include "fairflow/sim.hpp"

namespace fairflow {

inline constexpr double kCubicMinWindow = 2.0;

struct CubicState {
  double w = 10.0;            // congestion window, packets
  double w_max = 10.0;        // window at last loss
  double t_since_loss_s = 0.0;
  double rtt_s = 0.2;
  double c = 0.4;             // cubic scale, pkts/s^3
  double beta = 0.7;          // multiplicative decrease factor
};

// K = cbrt(w_max * (1 - beta) / C); W(0) = beta * w_max by construction.
double cubic_window(const CubicState& state, double t_s);

// w_max <- w, w <- max(2, beta*w), cubic clock reset.
CubicState cubic_on_loss(const CubicState& state);

inline double cubic_rate(const CubicState& state) { return state.w / state.rtt_s; }

// Drives CubicState once per MI from MonitorReports: a report with losses
// triggers at most one backoff, otherwise the cubic clock advances.
class CubicMiDriver {
 public:
  explicit CubicMiDriver(const LinkConfig& link, double initial_window = 10.0);

  double rate_pps() const { return cubic_rate(state_); }
  const CubicState& state() const { return state_; }
  void on_report(const MonitorReport& report);

 private:
  CubicState state_;
  double base_rtt_s_;
};

}  // namespace fairflow
