#pragma once
// Dense math kernels behind the MLP forward/backward passes. A scalar
// reference implementation always exists; an AVX2+FMA variant is selected at
// runtime when the CPU supports it. Set FAIRFLOW_KERNELS=scalar|avx2 to force
// a backend (avx2 silently falls back to scalar when unsupported).

#include <cstddef>
#include <string_view>

namespace fairflow::kernels {

struct Ops {
  // y[r] = b[r] + sum_c w[r*cols + c] * x[c]
  void (*matvec)(const double* w, const double* b, const double* x, double* y,
                 std::size_t rows, std::size_t cols);
  // dx[c] += sum_r w[r*cols + c] * dy[r]
  void (*matvec_t_acc)(const double* w, const double* dy, double* dx,
                       std::size_t rows, std::size_t cols);
  // g[r*cols + c] += dy[r] * x[c]
  void (*rank1_acc)(double* g, const double* dy, const double* x,
                    std::size_t rows, std::size_t cols);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  std::string_view name;
};

// Backend chosen at first call; stable for the process lifetime.
const Ops& ops();

const Ops& scalar_ops();
// nullptr when the binary or CPU lacks AVX2+FMA support.
const Ops* avx2_ops();

}  // namespace fairflow::kernels
