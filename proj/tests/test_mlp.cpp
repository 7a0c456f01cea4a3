// MLP forward arithmetic and analytic gradients against finite differences.

#include "doctest.h"

#include <cmath>
#include <vector>

#include "fairflow/checkpoint.hpp"
#include "fairflow/mlp.hpp"

using namespace fairflow;

TEST_CASE("zero parameters produce zero outputs") {
  Rng rng(1);
  PolicyNet net = PolicyNet::init(30, rng);
  for (auto& layer : net.pi.w) std::fill(layer.begin(), layer.end(), 0.0);
  for (auto& layer : net.pi.b) std::fill(layer.begin(), layer.end(), 0.0);
  for (auto& layer : net.v.w) std::fill(layer.begin(), layer.end(), 0.0);
  for (auto& layer : net.v.b) std::fill(layer.begin(), layer.end(), 0.0);
  std::vector<double> obs(30, 0.7);
  const auto out = net.forward(obs);
  CHECK(out.action_mean == 0.0);
  CHECK(out.value == 0.0);
}

TEST_CASE("hand-evaluated toy composition: tanh(tanh(0.5))") {
  Mlp toy;
  toy.sizes = {1, 1, 1};
  toy.tanh_output = true;
  toy.w = {{1.0}, {1.0}};
  toy.b = {{0.0}, {0.0}};
  toy.validate_shapes();
  const std::vector<double> x = {0.5};
  CHECK(toy.forward(x) == doctest::Approx(std::tanh(std::tanh(0.5))).epsilon(1e-15));
}

TEST_CASE("action mean stays in [-1, 1] for arbitrary inputs") {
  Rng rng(3);
  PolicyNet net = PolicyNet::init(30, rng);
  // Blow up the weights to push the pre-squash value far out.
  for (auto& layer : net.pi.w)
    for (double& w : layer) w *= 50.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> obs(30);
    for (double& v : obs) v = rng.uniform(-10.0, 10.0);
    const double mean = net.pi.forward(obs);
    CHECK(mean <= 1.0);
    CHECK(mean >= -1.0);
  }
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net = Mlp::init({2, 3, 1}, trial % 2 == 0, rng, 1.0);
    std::vector<double> x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

    Mlp::Tape tape;
    const double d_out = rng.uniform(-2.0, 2.0);
    net.forward(x, tape);
    MlpGrad grad = MlpGrad::zeros_like(net);
    net.backward(tape, d_out, grad);

    const double h = 1e-6;
    for (std::size_t p = 0; p < net.param_count(); ++p) {
      const double orig = net.get_param(p);
      net.set_param(p, orig + h);
      const double up = net.forward(x);
      net.set_param(p, orig - h);
      const double dn = net.forward(x);
      net.set_param(p, orig);
      const double fd = d_out * (up - dn) / (2.0 * h);
      const double an = grad.get(p);
      const double scale = std::max({1.0, std::abs(fd), std::abs(an)});
      CHECK(std::abs(fd - an) / scale < 1e-6);
    }
  }
}

TEST_CASE("tape forward agrees with plain forward") {
  Rng rng(23);
  Mlp net = Mlp::init({4, 5, 3, 1}, true, rng, 1.0);
  Mlp::Tape tape;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(4);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);
    CHECK(net.forward(x) == net.forward(x, tape));
  }
}
