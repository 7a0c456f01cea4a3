#pragma once
// Small dense MLPs with tanh hidden layers and hand-rolled reverse-mode
// gradients. The policy head squashes its scalar output through tanh so the
// action mean lands in [-1, 1]; the value head is linear. All nets here have
// one output.

#include <span>
#include <vector>

#include "fairflow/rng.hpp"

namespace fairflow {

struct MlpGrad;

struct Mlp {
  std::vector<int> sizes;  // input, hidden..., output(=1)
  bool tanh_output = false;
  // w[l] is row-major [sizes[l+1] x sizes[l]]
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  // Scaled-Gaussian init, N(0, 1/sqrt(fan_in)); the final layer additionally
  // multiplied by out_scale (small policy heads stabilise early PPO updates).
  static Mlp init(std::vector<int> sizes, bool tanh_output, Rng& rng,
                  double out_scale = 1.0);

  int input_dim() const { return sizes.front(); }
  int layer_count() const { return static_cast<int>(w.size()); }

  double forward(std::span<const double> x) const;

  // Forward pass recording every layer's activation for a later backward.
  struct Tape {
    std::vector<std::vector<double>> acts;  // acts[0] = input copy
  };
  double forward(std::span<const double> x, Tape& tape) const;

  // Accumulates dL/dparams into grad given dL/d(output). The output is the
  // post-tanh value when tanh_output is set.
  void backward(const Tape& tape, double d_output, MlpGrad& grad) const;

  // Flat parameter view in a fixed traversal order (w0, b0, w1, b1, ...);
  // used by the optimizer and the finite-difference checks.
  std::size_t param_count() const;
  double get_param(std::size_t idx) const;
  void set_param(std::size_t idx, double value);

  void validate_shapes() const;  // throws std::invalid_argument
};

struct MlpGrad {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  static MlpGrad zeros_like(const Mlp& net);
  void zero();
  double get(std::size_t idx) const;
};

}  // namespace fairflow
