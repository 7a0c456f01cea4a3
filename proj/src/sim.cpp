#include "fairflow/sim.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace fairflow {

void LinkConfig::validate() const {
  if (!(bandwidth_pps > 0.0)) {
    throw std::invalid_argument("LinkConfig: bandwidth_pps must be > 0");
  }
  if (!(one_way_latency_s > 0.0)) {
    throw std::invalid_argument("LinkConfig: one_way_latency_s must be > 0");
  }
  if (queue_capacity_pkts < 1) {
    throw std::invalid_argument("LinkConfig: queue_capacity_pkts must be >= 1");
  }
  if (random_loss_rate < 0.0 || random_loss_rate > 1.0) {
    throw std::invalid_argument("LinkConfig: random_loss_rate must be in [0,1]");
  }
}

LinkConfig duel_link() {
  LinkConfig link;
  link.bandwidth_pps = 300.0;
  link.one_way_latency_s = 0.1;
  link.queue_capacity_pkts = 100;
  link.random_loss_rate = 0.0;
  return link;
}

double apply_rate_action(double prev_rate_pps, double action,
                         const RateActionConfig& cfg) {
  const double a = std::clamp(action, -1.0, 1.0);
  double next = a >= 0.0 ? prev_rate_pps * (1.0 + cfg.alpha * a)
                         : prev_rate_pps / (1.0 - cfg.alpha * a);
  return std::max(next, kMinRatePps);
}

BottleneckSim::BottleneckSim(const LinkConfig& link, std::uint64_t seed)
    : link_(link), rng_(seed) {
  link_.validate();
}

int BottleneckSim::add_flow(double initial_rate_pps) {
  FlowState f;
  f.flow_id = static_cast<int>(flows_.size());
  f.send_rate_pps = std::max(initial_rate_pps, kMinRatePps);
  flows_.push_back(f);
  emission_credit_.push_back(0.0);
  min_latency_.push_back(0.0);
  arrivals_.emplace_back();
  cursor_.push_back(0);
  return f.flow_id;
}

void BottleneckSim::set_rate(int flow, double rate_pps) {
  flows_[flow].send_rate_pps = std::max(rate_pps, kMinRatePps);
}

void BottleneckSim::set_bandwidth_pps(double bandwidth_pps) {
  if (!(bandwidth_pps > 0.0)) {
    throw std::invalid_argument("set_bandwidth_pps: bandwidth must be > 0");
  }
  if (server_free_at_ > now_) {
    const double backlog_pkts = (server_free_at_ - now_) * link_.bandwidth_pps;
    server_free_at_ = now_ + backlog_pkts / bandwidth_pps;
  }
  link_.bandwidth_pps = bandwidth_pps;
}

int BottleneckSim::queue_occupancy() const {
  if (server_free_at_ <= now_) return 0;
  const double svc = 1.0 / link_.bandwidth_pps;
  return static_cast<int>(std::ceil((server_free_at_ - now_) / svc - 1e-9));
}

std::vector<MonitorReport> BottleneckSim::step(double duration_s,
                                               std::span<const bool> active) {
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("step: duration_s must be > 0");
  }
  if (!active.empty() && active.size() != flows_.size()) {
    throw std::invalid_argument("step: active mask length != flow count");
  }
  const std::size_t n = flows_.size();
  const double svc = 1.0 / link_.bandwidth_pps;
  const double one_way = link_.one_way_latency_s;
  const double loss = link_.random_loss_rate;

  std::vector<MonitorReport> reports(n);
  std::vector<double> latency_sum(n, 0.0);

  // Emit this MI's packets per active flow, evenly spaced from the interval
  // start. A fractional-packet credit carries across MIs so long-run emission
  // matches rate * time exactly.
  for (std::size_t i = 0; i < n; ++i) {
    arrivals_[i].clear();
    cursor_[i] = 0;
    flows_[i].active = active.empty() ? true : active[i];
    if (!flows_[i].active) {
      emission_credit_[i] = 0.0;
      continue;
    }
    const double want = flows_[i].send_rate_pps * duration_s + emission_credit_[i];
    const auto count = static_cast<std::uint64_t>(std::floor(want + 1e-9));
    emission_credit_[i] = want - static_cast<double>(count);
    if (count == 0) continue;
    const double spacing = duration_s / static_cast<double>(count);
    arrivals_[i].reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
      arrivals_[i].push_back(now_ + static_cast<double>(k) * spacing);
    }
  }

  // Merge arrivals in time order (ties broken by flow id) and run each packet
  // through the FIFO. A packet's fate is resolved at arrival: the service
  // schedule is deterministic, so completion time is known on acceptance even
  // when it lands past the MI boundary. That keeps sent = delivered + lost an
  // exact per-MI identity.
  while (true) {
    std::size_t pick = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (cursor_[i] < arrivals_[i].size() && arrivals_[i][cursor_[i]] < best) {
        best = arrivals_[i][cursor_[i]];
        pick = i;
      }
    }
    if (pick == n) break;
    const double t = arrivals_[pick][cursor_[pick]++];
    auto& rep = reports[pick];
    ++rep.sent_pkts;

    int occupancy = 0;
    if (server_free_at_ > t) {
      occupancy = static_cast<int>(std::ceil((server_free_at_ - t) / svc - 1e-9));
    }
    if (occupancy >= link_.queue_capacity_pkts) {
      ++rep.lost_pkts;  // tail drop
    } else if (loss > 0.0 && rng_.u01() < loss) {
      ++rep.lost_pkts;  // random loss, consumes no service time
    } else {
      const double start = std::max(server_free_at_, t);
      server_free_at_ = start + svc;
      const double latency = (server_free_at_ - t) + one_way;
      ++rep.delivered_pkts;
      latency_sum[pick] += latency;
      if (min_latency_[pick] == 0.0 || latency < min_latency_[pick]) {
        min_latency_[pick] = latency;
      }
    }
  }

  now_ += duration_s;
  for (std::size_t i = 0; i < n; ++i) {
    auto& rep = reports[i];
    rep.flow_id = flows_[i].flow_id;
    rep.mi_index = mi_index_;
    rep.duration_s = duration_s;
    rep.delivered_empty = rep.delivered_pkts == 0;
    if (!flows_[i].active) continue;  // muted: keep the all-zero report
    rep.throughput_pps = static_cast<double>(rep.delivered_pkts) / duration_s;
    rep.mean_latency_s =
        rep.delivered_pkts
            ? latency_sum[i] / static_cast<double>(rep.delivered_pkts)
            : 0.0;
    rep.min_latency_s_seen_so_far = min_latency_[i];
    flows_[i].sent += rep.sent_pkts;
    flows_[i].delivered += rep.delivered_pkts;
    flows_[i].lost += rep.lost_pkts;
  }
  ++mi_index_;
  return reports;
}

}  // namespace fairflow
