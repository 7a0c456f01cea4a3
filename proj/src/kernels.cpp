#include "fairflow/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace fairflow::kernels {

namespace {

void matvec_scalar(const double* w, const double* b, const double* x,
                   double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    double acc = b ? b[r] : 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

void matvec_t_acc_scalar(const double* w, const double* dy, double* dx,
                         std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    const double d = dy[r];
    for (std::size_t c = 0; c < cols; ++c) dx[c] += wr[c] * d;
  }
}

void rank1_acc_scalar(double* g, const double* dy, const double* x,
                      std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* gr = g + r * cols;
    const double d = dy[r];
    for (std::size_t c = 0; c < cols; ++c) gr[c] += d * x[c];
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

constexpr Ops kScalarOps{matvec_scalar, matvec_t_acc_scalar, rank1_acc_scalar,
                         dot_scalar,    axpy_scalar,          "scalar"};

const Ops* pick_backend() {
  const char* force = std::getenv("FAIRFLOW_KERNELS");
  if (force && std::string_view(force) == "scalar") return &kScalarOps;
  if (const Ops* simd = avx2_ops()) return simd;
  return &kScalarOps;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& ops() {
  static const Ops* chosen = pick_backend();
  return *chosen;
}

}  // namespace fairflow::kernels
