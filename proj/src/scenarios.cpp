#include "fairflow/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace fairflow {

PolicyController::PolicyController(const PolicyCheckpoint& ckpt)
    : ckpt_(&ckpt), augmented_(ckpt.augmented_obs()) {
  const int expected = augmented_ ? kAugObsDim : kBaseObsDim;
  if (ckpt.obs_dim() != expected) {
    throw CheckpointError(
        CheckpointError::Kind::kDimensionMismatch,
        "checkpoint obs_dim " + std::to_string(ckpt.obs_dim()) +
            " does not match strategy '" + strategy_name(ckpt.strategy) +
            "' scenario obs_dim " + std::to_string(expected));
  }
}

void PolicyController::reset(const LinkConfig& link, double initial_rate_pps,
                             std::uint64_t /*seed*/) {
  link_ = link;
  rate_ = std::max(initial_rate_pps, kMinRatePps);
  hist_.reset();
}

double PolicyController::act() {
  const Observation obs = hist_.observation(augmented_, rate_);
  const double mean = ckpt_->net.pi.forward(obs);
  rate_ = clamp_rate(apply_rate_action(rate_, mean, rate_cfg_), link_);
  return rate_;
}

void PolicyController::observe(const MonitorReport& report) {
  hist_.on_report(report);
}

void CubicController::reset(const LinkConfig& link, double /*initial_rate_pps*/,
                            std::uint64_t /*seed*/) {
  link_ = link;
  driver_ = std::make_unique<CubicMiDriver>(link);
}

double CubicController::act() {
  return clamp_rate(driver_->rate_pps(), link_);
}

void CubicController::observe(const MonitorReport& report) {
  driver_->on_report(report);
}

ControllerFactory policy_factory(const PolicyCheckpoint& ckpt) {
  return [&ckpt] { return std::make_unique<PolicyController>(ckpt); };
}

ControllerFactory cubic_factory() {
  return [] { return std::make_unique<CubicController>(); };
}

void ScenarioConfig::validate() const {
  link.validate();
  if (episodes < 1) throw std::invalid_argument("ScenarioConfig: episodes >= 1");
  if (episode_len < 1) throw std::invalid_argument("ScenarioConfig: episode_len >= 1");
  if (stagger_mis < 0 || stagger_mis >= episode_len) {
    throw std::invalid_argument("ScenarioConfig: need 0 <= stagger < episode_len");
  }
}

double SwitchingTrace::mbps_at(double t_s) const {
  auto idx = static_cast<std::size_t>(t_s / segment_s);
  if (idx >= segment_mbps.size()) idx = segment_mbps.size() - 1;
  return segment_mbps[idx];
}

SwitchingTrace default_switching_trace() {
  SwitchingTrace trace;
  trace.link.one_way_latency_s = 0.05;
  trace.link.queue_capacity_pkts = 500;
  trace.link.random_loss_rate = 0.0;
  trace.link.bandwidth_pps = trace.segment_mbps.front() * 1e6 /
                             trace.link.packet_size_bits;
  return trace;
}

std::string TraceResult::to_json() const {
  nlohmann::ordered_json j;
  j["mean_tput_mbps"] = mean_tput_mbps;
  j["utilization"] = utilization;
  j["mean_abs_gap_mbps"] = mean_abs_gap_mbps;
  j["tput_mbps"] = tput_mbps;
  j["capacity_mbps"] = capacity_mbps;
  return j.dump(2);
}

TraceResult run_single_flow_trace(Controller& controller,
                                  const SwitchingTrace& trace,
                                  std::uint64_t seed) {
  LinkConfig link = trace.link;
  link.bandwidth_pps = trace.segment_mbps.front() * 1e6 / link.packet_size_bits;
  link.validate();
  const double mi = link.mi_duration_s();
  const int steps = static_cast<int>(std::lround(trace.total_s() / mi));

  BottleneckSim sim(link, derive_seed(seed, 0));
  sim.add_flow(link.bandwidth_pps);
  controller.reset(link, link.bandwidth_pps, derive_seed(seed, 1));

  TraceResult result;
  result.tput_mbps.reserve(steps);
  result.capacity_mbps.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    const double want_mbps = trace.mbps_at(static_cast<double>(t) * mi);
    const double want_pps = want_mbps * 1e6 / link.packet_size_bits;
    if (std::abs(want_pps - sim.link().bandwidth_pps) > 1e-9) {
      sim.set_bandwidth_pps(want_pps);
    }
    sim.set_rate(0, controller.act());
    const auto reports = sim.step(mi);
    controller.observe(reports[0]);
    result.tput_mbps.push_back(link.mbps(reports[0].throughput_pps));
    result.capacity_mbps.push_back(want_mbps);
  }
  const auto ug = utilization_and_gap(result.tput_mbps, result.capacity_mbps);
  result.mean_tput_mbps = mean_of(result.tput_mbps);
  result.utilization = ug.utilization;
  result.mean_abs_gap_mbps = ug.mean_abs_gap;
  return result;
}

namespace {

struct DuelEpisode {
  std::vector<double> flow_mean_mbps;  // pre-entry excluded
  std::vector<std::vector<double>> tput_mbps;
  std::vector<double> capacity_mbps;
};

// Flow 0 = incumbent background from MI 0; flow 1 = ego, entering after the
// stagger. Controllers act only while active.
DuelEpisode run_two_flow_episode(Controller& background, Controller& ego,
                                 const ScenarioConfig& cfg, int episode) {
  const std::uint64_t ep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(episode));
  Rng ep_rng(ep_seed);
  const LinkConfig& link = cfg.link;
  const double mi = link.mi_duration_s();

  BottleneckSim sim(link, ep_rng.next_u64());
  const double bg_rate0 = ep_rng.uniform(0.3, 1.5) * link.bandwidth_pps;
  const double ego_rate0 = ep_rng.uniform(0.3, 1.5) * link.bandwidth_pps;
  sim.add_flow(bg_rate0);
  sim.add_flow(ego_rate0);
  background.reset(link, bg_rate0, derive_seed(ep_seed, 1));
  ego.reset(link, ego_rate0, derive_seed(ep_seed, 2));

  DuelEpisode out;
  out.tput_mbps.assign(2, std::vector<double>());
  for (int t = 0; t < cfg.episode_len; ++t) {
    const bool ego_active = t >= cfg.stagger_mis;
    const bool mask[2] = {true, ego_active};
    sim.set_rate(0, background.act());
    if (ego_active) sim.set_rate(1, ego.act());
    const auto reports = sim.step(mi, std::span<const bool>(mask, 2));
    background.observe(reports[0]);
    if (ego_active) ego.observe(reports[1]);
    out.tput_mbps[0].push_back(link.mbps(reports[0].throughput_pps));
    out.tput_mbps[1].push_back(link.mbps(reports[1].throughput_pps));
    out.capacity_mbps.push_back(link.capacity_mbps());
  }
  const auto window_mean = [&](const std::vector<double>& xs, int from) {
    double s = 0.0;
    for (std::size_t i = static_cast<std::size_t>(from); i < xs.size(); ++i) s += xs[i];
    return s / static_cast<double>(xs.size() - static_cast<std::size_t>(from));
  };
  out.flow_mean_mbps = {window_mean(out.tput_mbps[0], 0),
                        window_mean(out.tput_mbps[1], cfg.stagger_mis)};
  return out;
}

FairnessReport run_duel_like(const ControllerFactory& ego,
                             const ControllerFactory& background,
                             const ScenarioConfig& cfg,
                             const double* harm_solo_mbps) {
  cfg.validate();
  FairnessReport report;
  report.bg_flow = 0;
  report.ego_flow = 1;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    auto bg = background();
    auto eg = ego();
    const DuelEpisode de = run_two_flow_episode(*bg, *eg, cfg, ep);
    EpisodeResult er;
    er.episode = ep;
    er.flow_mbps = de.flow_mean_mbps;
    er.jain = jain_index(er.flow_mbps).value_or(1.0 / 2.0);
    if (harm_solo_mbps) {
      er.harm = harm(*harm_solo_mbps, er.flow_mbps[0]);  // flow 0 is the victim
    }
    report.episodes.push_back(std::move(er));
  }
  report.finalize();
  return report;
}

}  // namespace

FairnessReport run_staggered_duel(const ControllerFactory& ego,
                                  const ControllerFactory& background,
                                  const ScenarioConfig& cfg) {
  return run_duel_like(ego, background, cfg, nullptr);
}

double cubic_solo_baseline_mbps(const ScenarioConfig& cfg) {
  const LinkConfig& link = cfg.link;
  BottleneckSim sim(link, derive_seed(cfg.seed, 0xC0B1C));
  CubicController cubic;
  sim.add_flow(kMinRatePps);
  cubic.reset(link, kMinRatePps, derive_seed(cfg.seed, 0xC0B1D));
  double sum = 0.0;
  for (int t = 0; t < cfg.episode_len; ++t) {
    sim.set_rate(0, cubic.act());
    const auto reports = sim.step(link.mi_duration_s());
    cubic.observe(reports[0]);
    sum += link.mbps(reports[0].throughput_pps);
  }
  return sum / static_cast<double>(cfg.episode_len);
}

FairnessReport run_mixed_cubic(const ControllerFactory& ego,
                               const ScenarioConfig& cfg) {
  const double solo = cubic_solo_baseline_mbps(cfg);
  if (!(solo > 0.0)) {
    throw std::runtime_error("run_mixed_cubic: CUBIC solo baseline is zero");
  }
  return run_duel_like(ego, cubic_factory(), cfg, &solo);
}

EpisodeSeries run_duel_episode_series(const ControllerFactory& ego,
                                      const ControllerFactory& background,
                                      const ScenarioConfig& cfg, int episode) {
  cfg.validate();
  auto bg = background();
  auto eg = ego();
  const DuelEpisode de = run_two_flow_episode(*bg, *eg, cfg, episode);
  EpisodeSeries series;
  series.tput_mbps = de.tput_mbps;
  series.capacity_mbps = de.capacity_mbps;
  series.mi_duration_s = cfg.link.mi_duration_s();
  return series;
}

int DynamicTrace::flow_slots() const {
  int max_id = 0;
  for (const auto& [mi, ids] : events) {
    for (int id : ids) max_id = std::max(max_id, id);
  }
  return max_id;
}

void DynamicTrace::validate(int episode_len) const {
  if (events.empty()) throw std::invalid_argument("DynamicTrace: no events");
  if (events.front().first != 0) {
    throw std::invalid_argument("DynamicTrace: first event must be at MI 0");
  }
  int prev = -1;
  for (const auto& [mi, ids] : events) {
    if (mi <= prev) throw std::invalid_argument("DynamicTrace: event MIs must increase");
    if (mi >= episode_len) {
      throw std::invalid_argument("DynamicTrace: event MI beyond episode end");
    }
    if (ids.empty()) throw std::invalid_argument("DynamicTrace: empty active set");
    std::set<int> uniq(ids.begin(), ids.end());
    if (uniq.size() != ids.size() || *uniq.begin() < 1) {
      throw std::invalid_argument("DynamicTrace: flow ids must be unique and >= 1");
    }
    prev = mi;
  }
}

DynamicTrace default_dynamic_trace() {
  DynamicTrace trace;
  trace.events = {{0, {1}},
                  {80, {1, 2}},
                  {160, {1, 2, 3}},
                  {240, {1, 2, 3, 4}},
                  {320, {1, 3, 4}}};
  return trace;
}

std::string DynamicReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json jp = nlohmann::ordered_json::array();
  for (const auto& p : phases) {
    nlohmann::ordered_json e;
    e["phase"] = p.phase;
    e["start_mi"] = p.start_mi;
    e["end_mi"] = p.end_mi;
    e["active_flows"] = p.active;
    e["jain"] = p.jain;
    e["short_phase"] = p.short_phase;
    jp.push_back(std::move(e));
  }
  j["phases"] = std::move(jp);
  j["mi_duration_s"] = mi_duration_s;
  return j.dump(2);
}

DynamicReport run_dynamic(const ControllerFactory& factory,
                          const DynamicTrace& trace,
                          const ScenarioConfig& cfg) {
  cfg.link.validate();
  trace.validate(cfg.episode_len);
  const int slots = trace.flow_slots();
  const LinkConfig& link = cfg.link;
  const double mi = link.mi_duration_s();
  const std::uint64_t ep_seed = derive_seed(cfg.seed, 0xD15);
  Rng ep_rng(ep_seed);

  BottleneckSim sim(link, ep_rng.next_u64());
  std::vector<std::unique_ptr<Controller>> controllers;
  std::vector<double> init_rates;
  for (int s = 0; s < slots; ++s) {
    const double r0 = ep_rng.uniform(0.3, 1.5) * link.bandwidth_pps;
    init_rates.push_back(r0);
    sim.add_flow(r0);
    controllers.push_back(factory());
    controllers.back()->reset(link, r0, derive_seed(ep_seed, static_cast<std::uint64_t>(s) + 1));
  }

  DynamicReport report;
  report.mi_duration_s = mi;
  report.tput_mbps.assign(static_cast<std::size_t>(slots), {});

  std::vector<bool> active(static_cast<std::size_t>(slots), false);
  auto mask = std::make_unique<bool[]>(static_cast<std::size_t>(slots));
  std::size_t next_event = 0;
  for (int t = 0; t < cfg.episode_len; ++t) {
    if (next_event < trace.events.size() && trace.events[next_event].first == t) {
      std::fill(active.begin(), active.end(), false);
      for (int id : trace.events[next_event].second) {
        active[static_cast<std::size_t>(id - 1)] = true;  // ids are 1-indexed
      }
      ++next_event;
    }
    for (int s = 0; s < slots; ++s) {
      mask[static_cast<std::size_t>(s)] = active[static_cast<std::size_t>(s)];
      if (active[static_cast<std::size_t>(s)]) {
        sim.set_rate(s, controllers[static_cast<std::size_t>(s)]->act());
      }
    }
    const auto reports =
        sim.step(mi, std::span<const bool>(mask.get(), static_cast<std::size_t>(slots)));
    for (int s = 0; s < slots; ++s) {
      if (active[static_cast<std::size_t>(s)]) {
        controllers[static_cast<std::size_t>(s)]->observe(reports[static_cast<std::size_t>(s)]);
      }
      report.tput_mbps[static_cast<std::size_t>(s)].push_back(
          link.mbps(reports[static_cast<std::size_t>(s)].throughput_pps));
    }
  }
  // The metric works on series indices; the trace speaks 1-indexed flow ids.
  std::vector<std::pair<int, std::vector<int>>> slot_events = trace.events;
  for (auto& [mi, ids] : slot_events) {
    for (int& id : ids) --id;
  }
  report.phases = steady_state_jain(report.tput_mbps, slot_events,
                                    cfg.episode_len, 20);
  for (std::size_t p = 0; p < report.phases.size(); ++p) {
    report.phases[p].active = trace.events[p].second;  // printed ids
  }
  return report;
}

}  // namespace fairflow
