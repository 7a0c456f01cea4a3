// Feature extraction and observation assembly.

#include "doctest.h"

#include <vector>

#include "fairflow/features.hpp"

using namespace fairflow;

namespace {

MonitorReport make_report(std::uint64_t sent, std::uint64_t delivered,
                          double mean_lat, double min_lat, double dur = 0.2) {
  MonitorReport r;
  r.sent_pkts = sent;
  r.delivered_pkts = delivered;
  r.lost_pkts = sent - delivered;
  r.mean_latency_s = mean_lat;
  r.min_latency_s_seen_so_far = min_lat;
  r.duration_s = dur;
  r.throughput_pps = static_cast<double>(delivered) / dur;
  r.delivered_empty = delivered == 0;
  return r;
}

}  // namespace

TEST_CASE("uncongested steady state gives the neutral triple") {
  const auto prev = make_report(100, 100, 0.1, 0.1);
  const auto cur = make_report(100, 100, 0.1, 0.1);
  const MiFeatures f = compute_mi_features(cur, &prev, 0.1);
  CHECK(f.lat_grad == doctest::Approx(0.0));
  CHECK(f.lat_ratio == doctest::Approx(1.0));
  CHECK(f.send_ratio == doctest::Approx(1.0));
}

TEST_CASE("feature triple by direct substitution") {
  const auto prev = make_report(100, 100, 0.11, 0.10);
  const auto cur = make_report(100, 90, 0.12, 0.10);
  const MiFeatures f = compute_mi_features(cur, &prev, 0.10);
  CHECK(f.lat_grad == doctest::Approx(0.05));   // (0.12-0.11)/0.2
  CHECK(f.lat_ratio == doctest::Approx(1.2));   // 0.12/0.10
  CHECK(f.send_ratio == doctest::Approx(0.9));  // 90/100
}

TEST_CASE("muted MI yields neutral padding") {
  const auto cur = make_report(0, 0, 0.0, 0.0);
  const MiFeatures f = compute_mi_features(cur, nullptr, 0.0);
  CHECK(f.lat_grad == 0.0);
  CHECK(f.lat_ratio == 1.0);
  CHECK(f.send_ratio == 1.0);
}

TEST_CASE("cold-start observation shapes and neutral fill") {
  FeatureHistory hist;
  const Observation base = hist.observation(false, 100.0);
  REQUIRE(base.size() == kBaseObsDim);
  for (int k = 0; k < kHistoryLen; ++k) {
    CHECK(base[3 * k + 0] == 0.0);  // lat_grad
    CHECK(base[3 * k + 1] == 1.0);  // lat_ratio
    CHECK(base[3 * k + 2] == 1.0);  // send_ratio
  }
  const Observation aug = hist.observation(true, 100.0);
  CHECK(aug.size() == kAugObsDim);
}

TEST_CASE("observation length is exactly 30 or 32 and entries clipped") {
  FeatureHistory hist;
  for (int i = 0; i < 25; ++i) {
    // Absurd latency growth to force clipping of lat_grad/lat_ratio.
    hist.on_report(make_report(100, 100, 5.0 + 10.0 * i, 0.1));
    const Observation obs = hist.observation(i % 2 == 0, 100.0);
    CHECK((obs.size() == kBaseObsDim || obs.size() == kAugObsDim));
    for (double v : obs) {
      CHECK(v <= kObsClip);
      CHECK(v >= -kObsClip);
    }
  }
}

TEST_CASE("newest features land at the history tail") {
  FeatureHistory hist;
  hist.on_report(make_report(100, 50, 0.2, 0.1));  // send_ratio 0.5
  const Observation obs = hist.observation(false, 100.0);
  CHECK(obs[kBaseObsDim - 1] == doctest::Approx(0.5));   // newest send_ratio
  CHECK(obs[kBaseObsDim - 2] == doctest::Approx(2.0));   // newest lat_ratio
  CHECK(obs[2] == doctest::Approx(1.0));                 // oldest still neutral
}

TEST_CASE("estimate_capacity is send_rate * send_ratio") {
  CHECK(estimate_capacity(300.0, 1.0) == doctest::Approx(300.0));
  CHECK(estimate_capacity(400.0, 0.75) == doctest::Approx(300.0));
  CHECK(estimate_capacity(100.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("competitor estimate: solo signature, substitution, clamps") {
  const std::vector<double> flat(10, 250.0);
  const std::vector<double> no_loss(10, 0.0);
  CHECK(estimate_competitors(flat, no_loss) == doctest::Approx(1.0));

  // cv = 0.25 and mean loss 0.05 -> 1 + 1 + 1 = 3.
  const std::vector<double> tputs = {75.0, 125.0};  // mean 100, stddev 25
  const std::vector<double> losses = {0.05, 0.05};
  CHECK(estimate_competitors(tputs, losses) == doctest::Approx(3.0));

  const std::vector<double> wild = {1.0, 1000.0};
  const std::vector<double> heavy = {0.5, 0.5};
  CHECK(estimate_competitors(wild, heavy) == doctest::Approx(8.0));
}

TEST_CASE("competitor estimate monotone in cv and loss inside the clamp") {
  const std::vector<double> base_t = {90.0, 110.0};
  const std::vector<double> spread_t = {60.0, 140.0};
  const std::vector<double> lo_loss = {0.01, 0.01};
  const std::vector<double> hi_loss = {0.05, 0.05};
  const double a = estimate_competitors(base_t, lo_loss);
  const double b = estimate_competitors(spread_t, lo_loss);
  const double c = estimate_competitors(base_t, hi_loss);
  CHECK(b >= a);
  CHECK(c >= a);
}

TEST_CASE("tput_fraction clamps and floors the denominator") {
  CHECK(tput_fraction(150.0, 300.0) == doctest::Approx(0.5));
  CHECK(tput_fraction(300.0, 300.0) == doctest::Approx(1.0));
  CHECK(tput_fraction(10.0, 0.0) == doctest::Approx(1.0));  // eps floor, clamp
  CHECK(tput_fraction(0.0, 300.0) == doctest::Approx(0.0));
}

TEST_CASE("feature computation is pure") {
  const auto prev = make_report(80, 70, 0.14, 0.09);
  const auto cur = make_report(90, 60, 0.17, 0.09);
  const MiFeatures a = compute_mi_features(cur, &prev, 0.09);
  const MiFeatures b = compute_mi_features(cur, &prev, 0.09);
  CHECK(a.lat_grad == b.lat_grad);
  CHECK(a.lat_ratio == b.lat_ratio);
  CHECK(a.send_ratio == b.send_ratio);
}
