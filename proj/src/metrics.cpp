#include "fairflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fairflow {

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double m = mean_of(xs);
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return std::sqrt(v / static_cast<double>(xs.size()));
}

std::optional<double> jain_index(std::span<const double> throughputs) {
  if (throughputs.empty()) {
    throw std::invalid_argument("jain_index: empty input");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double x : throughputs) {
    if (x < 0.0) throw std::invalid_argument("jain_index: negative throughput");
    sum += x;
    sum_sq += x * x;
  }
  if (sum_sq == 0.0) return std::nullopt;  // all-zero: undefined
  return (sum * sum) / (static_cast<double>(throughputs.size()) * sum_sq);
}

double harm(double solo_tput_mbps, double mixed_tput_mbps) {
  if (!(solo_tput_mbps > 0.0)) {
    throw std::invalid_argument("harm: solo baseline missing (<= 0)");
  }
  return std::max(0.0, (solo_tput_mbps - mixed_tput_mbps) / solo_tput_mbps);
}

UtilizationGap utilization_and_gap(std::span<const double> tput,
                                   std::span<const double> capacity) {
  if (tput.empty() || tput.size() != capacity.size()) {
    throw std::invalid_argument("utilization_and_gap: empty or mismatched series");
  }
  UtilizationGap out;
  double gap = 0.0;
  for (std::size_t i = 0; i < tput.size(); ++i) {
    gap += std::abs(tput[i] - capacity[i]);
  }
  out.mean_abs_gap = gap / static_cast<double>(tput.size());
  const double cap_mean = mean_of(capacity);
  out.utilization = cap_mean > 0.0 ? mean_of(tput) / cap_mean : 0.0;
  return out;
}

std::vector<PhaseJain> steady_state_jain(
    const std::vector<std::vector<double>>& per_step_throughputs,
    const std::vector<std::pair<int, std::vector<int>>>& events,
    int total_steps, int window) {
  if (events.empty()) throw std::invalid_argument("steady_state_jain: no events");
  std::vector<PhaseJain> phases;
  for (std::size_t e = 0; e < events.size(); ++e) {
    PhaseJain p;
    p.phase = static_cast<int>(e);
    p.start_mi = events[e].first;
    p.end_mi = e + 1 < events.size() ? events[e + 1].first : total_steps;
    p.active = events[e].second;
    if (p.end_mi <= p.start_mi) {
      throw std::invalid_argument("steady_state_jain: events not increasing");
    }
    const int len = p.end_mi - p.start_mi;
    const int w = std::min(window, len);
    p.short_phase = len < window;
    std::vector<double> means;
    means.reserve(p.active.size());
    for (int flow : p.active) {
      const auto& series = per_step_throughputs.at(static_cast<std::size_t>(flow));
      double s = 0.0;
      for (int t = p.end_mi - w; t < p.end_mi; ++t) {
        s += series.at(static_cast<std::size_t>(t));
      }
      means.push_back(s / static_cast<double>(w));
    }
    const auto j = jain_index(means);
    p.jain = j.value_or(1.0 / static_cast<double>(means.size()));
    phases.push_back(std::move(p));
  }
  return phases;
}

void FairnessReport::finalize() {
  std::vector<double> jains, egos, bgs, harms;
  for (const auto& ep : episodes) {
    jains.push_back(ep.jain);
    egos.push_back(ep.flow_mbps.at(static_cast<std::size_t>(ego_flow)));
    bgs.push_back(ep.flow_mbps.at(static_cast<std::size_t>(bg_flow)));
    if (ep.harm) harms.push_back(*ep.harm);
  }
  mean_jain = mean_of(jains);
  std_jain = stddev_of(jains);
  min_jain = jains.empty() ? 0.0 : *std::min_element(jains.begin(), jains.end());
  ego_mean_mbps = mean_of(egos);
  bg_mean_mbps = mean_of(bgs);
  aggregate_mbps = ego_mean_mbps + bg_mean_mbps;
  if (!harms.empty()) {
    mean_harm = mean_of(harms);
    std_harm = stddev_of(harms);
  }
}

std::string FairnessReport::to_json() const {
  nlohmann::ordered_json j;
  j["mean_jain"] = mean_jain;
  j["std_jain"] = std_jain;
  j["min_jain"] = min_jain;
  j["ego_flow"] = ego_flow;
  j["bg_flow"] = bg_flow;
  j["ego_mean_mbps"] = ego_mean_mbps;
  j["bg_mean_mbps"] = bg_mean_mbps;
  j["aggregate_mbps"] = aggregate_mbps;
  if (mean_harm) {
    j["mean_harm"] = *mean_harm;
    j["std_harm"] = *std_harm;
  }
  nlohmann::ordered_json eps = nlohmann::ordered_json::array();
  for (const auto& ep : episodes) {
    nlohmann::ordered_json je;
    je["episode"] = ep.episode;
    je["flow_mbps"] = ep.flow_mbps;
    je["jain"] = ep.jain;
    if (ep.harm) je["harm"] = *ep.harm;
    eps.push_back(std::move(je));
  }
  j["episodes"] = std::move(eps);
  return j.dump(2);
}

std::string FairnessReport::to_csv() const {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  const std::size_t flows = episodes.empty() ? 0 : episodes.front().flow_mbps.size();
  out << "episode,jain";
  for (std::size_t f = 0; f < flows; ++f) out << ",flow" << f << "_mbps";
  out << ",harm\n";
  for (const auto& ep : episodes) {
    out << ep.episode << ',' << ep.jain;
    for (double v : ep.flow_mbps) out << ',' << v;
    out << ',';
    if (ep.harm) out << *ep.harm;
    out << '\n';
  }
  return out.str();
}

}  // namespace fairflow
