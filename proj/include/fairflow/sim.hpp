#pragma once
// Shared-bottleneck network simulator. Each flow emits evenly spaced packets
// at its send rate; arrivals from all flows merge in time order into one FIFO
// queue with deterministic service time 1/B. A packet is tail-dropped when
// the queue is full at arrival, otherwise dropped i.i.d. at the link's random
// loss rate, otherwise served. Queue backlog persists across monitor
// intervals. Control decisions happen once per monitor interval (MI), one
// round trip long.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fairflow/rng.hpp"

namespace fairflow {

// Multiplicative decrease floor; keeps a flow from freezing at rate zero.
inline constexpr double kMinRatePps = 1.0;
// 1500-byte packets.
inline constexpr double kDefaultPacketBits = 12000.0;

struct LinkConfig {
  double bandwidth_pps = 300.0;
  double one_way_latency_s = 0.1;
  int queue_capacity_pkts = 100;
  double random_loss_rate = 0.0;
  double packet_size_bits = kDefaultPacketBits;

  // One MI spans one round trip so latency feedback is one MI fresh.
  double mi_duration_s() const { return 2.0 * one_way_latency_s; }
  double mbps(double pps) const { return pps * packet_size_bits / 1e6; }
  double capacity_mbps() const { return mbps(bandwidth_pps); }
  void validate() const;  // throws std::invalid_argument on bad fields
};

// Link used for the 2-flow duels and extended scenarios: 300 pps (3.6 Mbps),
// 100 ms one-way latency, 100-packet queue, no random loss.
LinkConfig duel_link();

struct FlowState {
  int flow_id = 0;
  double send_rate_pps = kMinRatePps;
  bool active = true;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t lost = 0;
};

struct MonitorReport {
  int flow_id = 0;
  int mi_index = 0;
  double duration_s = 0.0;
  std::uint64_t sent_pkts = 0;
  std::uint64_t delivered_pkts = 0;
  std::uint64_t lost_pkts = 0;
  double mean_latency_s = 0.0;             // 0 when nothing was delivered
  double min_latency_s_seen_so_far = 0.0;  // per-packet running min; 0 until first delivery
  double throughput_pps = 0.0;             // delivered / duration
  bool delivered_empty = true;             // consumers must not divide by zero

  double loss_fraction() const {
    return sent_pkts ? static_cast<double>(lost_pkts) / static_cast<double>(sent_pkts) : 0.0;
  }
};

struct RateActionConfig {
  double alpha = 0.025;
};

// x_t = x_{t-1} * (1 + alpha*a) for a >= 0, x_{t-1} / (1 - alpha*a) otherwise.
// The action is clamped to [-1, 1] and the result floored at kMinRatePps.
double apply_rate_action(double prev_rate_pps, double action,
                         const RateActionConfig& cfg = {});

// Training-link distribution: BW uniform [100,500] pps, one-way latency
// uniform [0.05,0.5] s, queue log-uniform [2,2981] pkts, loss uniform
// [0,0.05]. Draw order: bandwidth, latency, queue, loss.
template <typename U01>
LinkConfig sample_training_link_with(U01&& u) {
  LinkConfig link;
  link.bandwidth_pps = 100.0 + 400.0 * u();
  link.one_way_latency_s = 0.05 + 0.45 * u();
  const double lo = std::log(2.0), hi = std::log(2981.0);
  int q = static_cast<int>(std::lround(std::exp(lo + (hi - lo) * u())));
  link.queue_capacity_pkts = q < 2 ? 2 : (q > 2981 ? 2981 : q);
  link.random_loss_rate = 0.05 * u();
  return link;
}

inline LinkConfig sample_training_link(Rng& rng) {
  return sample_training_link_with([&rng] { return rng.u01(); });
}

class BottleneckSim {
 public:
  BottleneckSim(const LinkConfig& link, std::uint64_t seed);

  int add_flow(double initial_rate_pps);
  void set_rate(int flow, double rate_pps);  // floored at kMinRatePps
  double rate(int flow) const { return flows_[flow].send_rate_pps; }

  // Rescales the remaining backlog to the new drain rate, preserving the
  // queued packet count (bandwidth-switching traces).
  void set_bandwidth_pps(double bandwidth_pps);

  const LinkConfig& link() const { return link_; }
  int flow_count() const { return static_cast<int>(flows_.size()); }
  const FlowState& flow(int i) const { return flows_[i]; }
  double now_s() const { return now_; }
  int queue_occupancy() const;  // unfinished packets at now_s

  // Advance one monitor interval. An empty mask means all flows active; a
  // muted flow emits nothing and gets an all-zero report.
  std::vector<MonitorReport> step(double duration_s,
                                  std::span<const bool> active = {});

 private:
  LinkConfig link_;
  std::vector<FlowState> flows_;
  std::vector<double> emission_credit_;  // fractional packets carried per flow
  std::vector<double> min_latency_;      // per-flow running min, 0 = none yet
  Rng rng_;
  double now_ = 0.0;
  double server_free_at_ = 0.0;
  int mi_index_ = 0;

  // scratch buffers reused across steps
  std::vector<std::vector<double>> arrivals_;
  std::vector<std::size_t> cursor_;
};

}  // namespace fairflow
