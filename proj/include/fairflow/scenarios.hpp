#pragma once
// Evaluation protocols: single-flow bandwidth-switching trace, staggered
// 2-flow duel, mixed RL-vs-CUBIC with the Harm metric, and the dynamic
// entry/exit trace. Every episode derives its seeds from the scenario seed,
// so a fixed configuration reproduces byte-identical reports.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fairflow/checkpoint.hpp"
#include "fairflow/cubic.hpp"
#include "fairflow/env.hpp"
#include "fairflow/features.hpp"
#include "fairflow/metrics.hpp"
#include "fairflow/sim.hpp"

namespace fairflow {

// Per-flow rate controller driven once per MI. act() returns the send rate
// for the coming interval; observe() feeds back that interval's report.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(const LinkConfig& link, double initial_rate_pps,
                     std::uint64_t seed) = 0;
  virtual double act() = 0;
  virtual void observe(const MonitorReport& report) = 0;
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

// Trained policy, deterministic action mean at evaluation time. Augmented
// observation wiring is inferred from the checkpoint's strategy metadata;
// construction rejects checkpoints whose obs_dim contradicts it.
class PolicyController : public Controller {
 public:
  explicit PolicyController(const PolicyCheckpoint& ckpt);

  void reset(const LinkConfig& link, double initial_rate_pps,
             std::uint64_t seed) override;
  double act() override;
  void observe(const MonitorReport& report) override;

 private:
  const PolicyCheckpoint* ckpt_;
  bool augmented_;
  LinkConfig link_;
  FeatureHistory hist_;
  RateActionConfig rate_cfg_;
  double rate_ = kMinRatePps;
};

class CubicController : public Controller {
 public:
  void reset(const LinkConfig& link, double initial_rate_pps,
             std::uint64_t seed) override;
  double act() override;
  void observe(const MonitorReport& report) override;

 private:
  std::unique_ptr<CubicMiDriver> driver_;
  LinkConfig link_;
};

// Test helper: holds a fixed rate forever.
class PinnedController : public Controller {
 public:
  explicit PinnedController(double rate_pps = 0.0) : fixed_rate_(rate_pps) {}
  void reset(const LinkConfig&, double initial_rate_pps, std::uint64_t) override {
    rate_ = fixed_rate_ > 0.0 ? fixed_rate_ : initial_rate_pps;
  }
  double act() override { return rate_; }
  void observe(const MonitorReport&) override {}

 private:
  double fixed_rate_;
  double rate_ = kMinRatePps;
};

ControllerFactory policy_factory(const PolicyCheckpoint& ckpt);
ControllerFactory cubic_factory();

struct ScenarioConfig {
  LinkConfig link = duel_link();
  int episodes = 50;
  int stagger_mis = 50;
  int episode_len = 400;
  std::uint64_t seed = 42;

  void validate() const;  // throws std::invalid_argument
};

// ---- single-flow trace ----

struct SwitchingTrace {
  std::vector<double> segment_mbps = {20.0, 40.0, 20.0, 40.0, 20.0};
  double segment_s = 5.0;
  LinkConfig link;  // bandwidth field is overwritten per segment

  double total_s() const { return segment_s * static_cast<double>(segment_mbps.size()); }
  double mbps_at(double t_s) const;
};

// The 25-second 20/40 Mbps trace; 50 ms one-way latency, 500-packet queue.
SwitchingTrace default_switching_trace();

struct TraceResult {
  std::vector<double> tput_mbps;      // per MI
  std::vector<double> capacity_mbps;  // per MI
  double mean_tput_mbps = 0.0;
  double utilization = 0.0;
  double mean_abs_gap_mbps = 0.0;

  std::string to_json() const;
};

TraceResult run_single_flow_trace(Controller& controller,
                                  const SwitchingTrace& trace,
                                  std::uint64_t seed);

// ---- staggered duel / mixed CUBIC ----

// Flow 0 is the incumbent background, running alone for stagger_mis; the ego
// joins as flow 1 and its pre-entry period is excluded from its mean.
FairnessReport run_staggered_duel(const ControllerFactory& ego,
                                  const ControllerFactory& background,
                                  const ScenarioConfig& cfg);

// CUBIC mean throughput running alone on the link for one episode.
double cubic_solo_baseline_mbps(const ScenarioConfig& cfg);

// Ego vs one CUBIC flow; per-episode Harm against the CUBIC solo baseline.
FairnessReport run_mixed_cubic(const ControllerFactory& ego,
                               const ScenarioConfig& cfg);

// ---- dynamic entry/exit ----

struct DynamicTrace {
  // (event MI, active flow ids); ids are 1-indexed.
  std::vector<std::pair<int, std::vector<int>>> events;

  int flow_slots() const;
  void validate(int episode_len) const;  // throws std::invalid_argument
};

// {1} -> {1,2} -> {1,2,3} -> {1,2,3,4} -> {1,3,4} at MIs 0/80/160/240/320.
DynamicTrace default_dynamic_trace();

struct DynamicReport {
  std::vector<PhaseJain> phases;
  std::vector<std::vector<double>> tput_mbps;  // [flow][mi]
  double mi_duration_s = 0.0;

  std::string to_json() const;
};

// Single deterministic episode; every slot runs a controller from the same
// factory (homogeneous), masked in and out per the trace.
DynamicReport run_dynamic(const ControllerFactory& factory,
                          const DynamicTrace& trace,
                          const ScenarioConfig& cfg);

// Per-MI per-flow throughput series of one duel/mixed episode, for plotting.
struct EpisodeSeries {
  std::vector<std::vector<double>> tput_mbps;  // [flow][mi]
  std::vector<double> capacity_mbps;
  double mi_duration_s = 0.0;
};
EpisodeSeries run_duel_episode_series(const ControllerFactory& ego,
                                      const ControllerFactory& background,
                                      const ScenarioConfig& cfg, int episode);

}  // namespace fairflow
