#include "fairflow/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "fairflow/kernels.hpp"

namespace fairflow {

Mlp Mlp::init(std::vector<int> sizes, bool tanh_output, Rng& rng,
              double out_scale) {
  if (sizes.size() < 2 || sizes.back() != 1) {
    throw std::invalid_argument("Mlp::init: need >= 2 layer sizes ending in 1");
  }
  Mlp net;
  net.sizes = std::move(sizes);
  net.tanh_output = tanh_output;
  const int layers = static_cast<int>(net.sizes.size()) - 1;
  net.w.resize(layers);
  net.b.resize(layers);
  for (int l = 0; l < layers; ++l) {
    const int rows = net.sizes[l + 1];
    const int cols = net.sizes[l];
    const double scale =
        (l == layers - 1 ? out_scale : 1.0) / std::sqrt(static_cast<double>(cols));
    net.w[l].resize(static_cast<std::size_t>(rows) * cols);
    net.b[l].assign(rows, 0.0);
    for (double& v : net.w[l]) v = scale * rng.normal();
  }
  return net;
}

void Mlp::validate_shapes() const {
  if (sizes.size() < 2 || w.size() != sizes.size() - 1 || b.size() != w.size()) {
    throw std::invalid_argument("Mlp: inconsistent layer bookkeeping");
  }
  for (std::size_t l = 0; l < w.size(); ++l) {
    const auto rows = static_cast<std::size_t>(sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(sizes[l]);
    if (w[l].size() != rows * cols || b[l].size() != rows) {
      throw std::invalid_argument("Mlp: weight shape mismatch at layer " +
                                  std::to_string(l));
    }
  }
}

double Mlp::forward(std::span<const double> x) const {
  const auto& k = kernels::ops();
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    next.assign(static_cast<std::size_t>(sizes[l + 1]), 0.0);
    k.matvec(w[l].data(), b[l].data(), cur.data(), next.data(), next.size(),
             cur.size());
    if (l < layers - 1) {
      for (double& v : next) v = std::tanh(v);
    }
    cur.swap(next);
  }
  return tanh_output ? std::tanh(cur[0]) : cur[0];
}

double Mlp::forward(std::span<const double> x, Tape& tape) const {
  const auto& k = kernels::ops();
  const int layers = layer_count();
  tape.acts.resize(layers + 1);
  tape.acts[0].assign(x.begin(), x.end());
  for (int l = 0; l < layers; ++l) {
    auto& out = tape.acts[l + 1];
    out.assign(static_cast<std::size_t>(sizes[l + 1]), 0.0);
    k.matvec(w[l].data(), b[l].data(), tape.acts[l].data(), out.data(),
             out.size(), tape.acts[l].size());
    if (l < layers - 1) {
      for (double& v : out) v = std::tanh(v);
    } else if (tanh_output) {
      out[0] = std::tanh(out[0]);
    }
  }
  return tape.acts[layers][0];
}

void Mlp::backward(const Tape& tape, double d_output, MlpGrad& grad) const {
  const auto& k = kernels::ops();
  const int layers = layer_count();
  double d_out = d_output;
  if (tanh_output) {
    const double y = tape.acts[layers][0];
    d_out *= 1.0 - y * y;
  }
  std::vector<double> delta{d_out};  // dL/dz for the current layer
  std::vector<double> d_prev;
  for (int l = layers - 1; l >= 0; --l) {
    const auto& input = tape.acts[l];
    k.rank1_acc(grad.w[l].data(), delta.data(), input.data(), delta.size(),
                input.size());
    for (std::size_t r = 0; r < delta.size(); ++r) grad.b[l][r] += delta[r];
    if (l == 0) break;
    d_prev.assign(input.size(), 0.0);
    k.matvec_t_acc(w[l].data(), delta.data(), d_prev.data(), delta.size(),
                   input.size());
    // input of layer l is the tanh activation output of layer l-1
    for (std::size_t i = 0; i < d_prev.size(); ++i) {
      d_prev[i] *= 1.0 - input[i] * input[i];
    }
    delta.swap(d_prev);
  }
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
  return n;
}

double Mlp::get_param(std::size_t idx) const {
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (idx < w[l].size()) return w[l][idx];
    idx -= w[l].size();
    if (idx < b[l].size()) return b[l][idx];
    idx -= b[l].size();
  }
  throw std::out_of_range("Mlp::get_param");
}

void Mlp::set_param(std::size_t idx, double value) {
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (idx < w[l].size()) {
      w[l][idx] = value;
      return;
    }
    idx -= w[l].size();
    if (idx < b[l].size()) {
      b[l][idx] = value;
      return;
    }
    idx -= b[l].size();
  }
  throw std::out_of_range("Mlp::set_param");
}

MlpGrad MlpGrad::zeros_like(const Mlp& net) {
  MlpGrad g;
  g.w.resize(net.w.size());
  g.b.resize(net.b.size());
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    g.w[l].assign(net.w[l].size(), 0.0);
    g.b[l].assign(net.b[l].size(), 0.0);
  }
  return g;
}

void MlpGrad::zero() {
  for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
  for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

double MlpGrad::get(std::size_t idx) const {
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (idx < w[l].size()) return w[l][idx];
    idx -= w[l].size();
    if (idx < b[l].size()) return b[l][idx];
    idx -= b[l].size();
  }
  throw std::out_of_range("MlpGrad::get");
}

}  // namespace fairflow
