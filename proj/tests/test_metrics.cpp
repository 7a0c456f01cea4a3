// Metric oracles: Jain's index, Harm, utilization/gap, steady-state phases.

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fairflow/metrics.hpp"
#include "fairflow/rng.hpp"

using namespace fairflow;

namespace {

// Independent long-double route for the Jain formula.
long double jain_oracle(const std::vector<double>& xs) {
  long double sum = 0.0L, sum_sq = 0.0L;
  for (double x : xs) {
    sum += static_cast<long double>(x);
    sum_sq += static_cast<long double>(x) * static_cast<long double>(x);
  }
  return (sum * sum) / (static_cast<long double>(xs.size()) * sum_sq);
}

}  // namespace

TEST_CASE("jain index on the pinned examples") {
  CHECK(jain_index(std::vector<double>{3.0, 3.0, 3.0, 3.0}).value() ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(jain_index(std::vector<double>{1.0, 0.0}).value() ==
        doctest::Approx(0.5).epsilon(1e-15));
  // Table-style per-flow means 2.3/1.3: J of the means, not the mean of Js.
  CHECK(jain_index(std::vector<double>{2.3, 1.3}).value() ==
        doctest::Approx(12.96 / 13.96).epsilon(1e-12));
}

TEST_CASE("jain matches the brute-force route on 1000 random vectors") {
  Rng rng(4242);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.u01() * 8);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (double& x : xs) x = rng.uniform(0.0, 50.0);
    if (std::all_of(xs.begin(), xs.end(), [](double v) { return v == 0.0; })) {
      xs[0] = 1.0;
    }
    const double j = jain_index(xs).value();
    CHECK(std::abs(j - static_cast<double>(jain_oracle(xs))) < 1e-12);
    CHECK(j >= 1.0 / static_cast<double>(n) - 1e-12);
    CHECK(j <= 1.0 + 1e-12);
    // Scale invariance.
    std::vector<double> scaled = xs;
    for (double& x : scaled) x *= 37.5;
    CHECK(std::abs(jain_index(scaled).value() - j) < 1e-12);
  }
}

TEST_CASE("jain error cases") {
  CHECK_FALSE(jain_index(std::vector<double>{0.0, 0.0}).has_value());
  CHECK_THROWS_AS(jain_index(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(jain_index(std::vector<double>{1.0, -0.5}), std::invalid_argument);
}

TEST_CASE("harm hinge and error path") {
  CHECK(harm(4.0, 5.0) == 0.0);
  CHECK(harm(4.0, 4.0) == 0.0);
  CHECK(harm(4.0, 3.0) == doctest::Approx(0.25));
  CHECK(harm(2.0, 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(harm(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(harm(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("utilization and gap") {
  const std::vector<double> cap = {20, 20, 40, 40};
  SUBCASE("perfect tracking") {
    const auto ug = utilization_and_gap(cap, cap);
    CHECK(ug.utilization == doctest::Approx(1.0));
    CHECK(ug.mean_abs_gap == doctest::Approx(0.0));
  }
  SUBCASE("constant throughput on the switching trace") {
    // 25 s of [20,40,20,40,20] averages 28 Mbps; 18.4/28 ~ 0.657.
    std::vector<double> trace_cap;
    for (int seg = 0; seg < 5; ++seg) {
      for (int i = 0; i < 50; ++i) trace_cap.push_back(seg % 2 == 0 ? 20.0 : 40.0);
    }
    const std::vector<double> tput(trace_cap.size(), 18.4);
    const auto ug = utilization_and_gap(tput, trace_cap);
    CHECK(ug.utilization == doctest::Approx(18.4 / 28.0).epsilon(1e-12));
    CHECK(ug.utilization == doctest::Approx(0.656).epsilon(0.01));
  }
  SUBCASE("idle flow") {
    const std::vector<double> zero(cap.size(), 0.0);
    const auto ug = utilization_and_gap(zero, cap);
    CHECK(ug.utilization == doctest::Approx(0.0));
    CHECK(ug.mean_abs_gap == doctest::Approx(30.0));
  }
  SUBCASE("empty series") {
    CHECK_THROWS_AS(utilization_and_gap({}, {}), std::invalid_argument);
  }
}

TEST_CASE("steady-state J per phase") {
  // Two flows, 100 steps, event at 50: flow1 active only in phase 1.
  std::vector<std::vector<double>> series(2, std::vector<double>(100, 0.0));
  for (int t = 0; t < 100; ++t) {
    series[0][static_cast<std::size_t>(t)] = 3.0;
    series[1][static_cast<std::size_t>(t)] = t >= 50 ? 1.0 : 0.0;
  }
  const std::vector<std::pair<int, std::vector<int>>> events = {{0, {0}},
                                                                {50, {0, 1}}};
  const auto phases = steady_state_jain(series, events, 100, 20);
  REQUIRE(phases.size() == 2);
  CHECK(phases[0].jain == 1.0);  // single flow: exactly 1
  CHECK_FALSE(phases[0].short_phase);
  // Phase with means [3, 1]: (4)^2 / (2*10) = 0.8.
  CHECK(phases[1].jain == doctest::Approx(0.8).epsilon(1e-12));

  // Identical flows give exactly 1.
  series[1] = series[0];
  const auto equal_phases = steady_state_jain(series, events, 100, 20);
  CHECK(equal_phases[1].jain == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("short phases fall back to the whole phase and get flagged") {
  std::vector<std::vector<double>> series(1, std::vector<double>(30, 2.0));
  const std::vector<std::pair<int, std::vector<int>>> events = {{0, {0}},
                                                                {25, {0}}};
  const auto phases = steady_state_jain(series, events, 30, 20);
  CHECK_FALSE(phases[0].short_phase);
  CHECK(phases[1].short_phase);  // 5 steps < window of 20
  CHECK(phases[1].jain == 1.0);
}

TEST_CASE("fairness report aggregates and conserves") {
  FairnessReport report;
  report.bg_flow = 0;
  report.ego_flow = 1;
  for (int ep = 0; ep < 3; ++ep) {
    EpisodeResult er;
    er.episode = ep;
    er.flow_mbps = {2.0 + ep * 0.1, 1.0};
    er.jain = jain_index(er.flow_mbps).value();
    er.harm = 0.1 * ep;
    report.episodes.push_back(er);
  }
  report.finalize();
  CHECK(report.aggregate_mbps ==
        doctest::Approx(report.ego_mean_mbps + report.bg_mean_mbps).epsilon(1e-15));
  CHECK(report.mean_harm.value() == doctest::Approx(0.1));
  CHECK(report.min_jain <= report.mean_jain);

  const std::string csv = report.to_csv();
  CHECK(csv.find("episode,jain,flow0_mbps,flow1_mbps,harm") == 0);
  const std::string json = report.to_json();
  CHECK(json.find("\"aggregate_mbps\"") != std::string::npos);
}
