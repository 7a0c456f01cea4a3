#pragma once
// Fairness and utilization metrics: Jain's index, the Harm metric (counter-
// factual throughput loss against a solo baseline), trace utilization/gap
// statistics, per-phase steady-state J, and the FairnessReport aggregate.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fairflow {

// (sum x)^2 / (N * sum x^2), in [1/N, 1]. nullopt for the undefined all-zero
// case; entries must be nonnegative.
std::optional<double> jain_index(std::span<const double> throughputs);

// max(0, (solo - mixed)/solo). Throws std::invalid_argument when the solo
// baseline is missing (<= 0).
double harm(double solo_tput_mbps, double mixed_tput_mbps);

struct UtilizationGap {
  double utilization = 0.0;
  double mean_abs_gap = 0.0;
};
// utilization = mean(tput)/mean(capacity); gap = mean |tput_t - capacity_t|.
// Throws std::invalid_argument on empty or mismatched series.
UtilizationGap utilization_and_gap(std::span<const double> tput,
                                   std::span<const double> capacity);

struct PhaseJain {
  int phase = 0;
  int start_mi = 0;
  int end_mi = 0;               // exclusive
  std::vector<int> active;      // indices into the throughput series
  double jain = 0.0;
  bool short_phase = false;     // phase shorter than the window; whole phase used
};

// Steady-state J per phase: J over per-flow means of the last `window` steps
// before the next event, restricted to flows active in the phase. Events
// carry 0-based indices into per_step_throughputs[f][t]; event MIs must be
// sorted, starting at 0.
std::vector<PhaseJain> steady_state_jain(
    const std::vector<std::vector<double>>& per_step_throughputs,
    const std::vector<std::pair<int, std::vector<int>>>& events,
    int total_steps, int window = 20);

struct EpisodeResult {
  int episode = 0;
  std::vector<double> flow_mbps;  // whole-episode mean, pre-entry excluded
  double jain = 0.0;
  std::optional<double> harm;
};

struct FairnessReport {
  std::vector<EpisodeResult> episodes;
  double mean_jain = 0.0;
  double std_jain = 0.0;
  double min_jain = 0.0;
  double ego_mean_mbps = 0.0;
  double bg_mean_mbps = 0.0;
  double aggregate_mbps = 0.0;  // ego + background means
  std::optional<double> mean_harm;
  std::optional<double> std_harm;
  int ego_flow = 1;  // index into flow_mbps
  int bg_flow = 0;

  // Derives the aggregate fields from `episodes`; ego/bg indices must be set.
  void finalize();

  std::string to_json() const;
  // One row per episode: episode,jain,flow columns...,harm
  std::string to_csv() const;
};

double mean_of(std::span<const double> xs);
double stddev_of(std::span<const double> xs);  // population

}  // namespace fairflow
