// AVX2+FMA variants of the dense kernels. Compiled with -mavx2 -mfma on
// x86-64; the dispatcher checks cpuid before handing these out, so the rest
// of the binary stays runnable on older cores.

#include "fairflow/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace fairflow::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void matvec_avx2(const double* w, const double* b, const double* x, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = (b ? b[r] : 0.0) + dot_avx2(w + r * cols, x, cols);
  }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_t_acc_avx2(const double* w, const double* dy, double* dx,
                       std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_avx2(dy[r], w + r * cols, dx, cols);
  }
}

void rank1_acc_avx2(double* g, const double* dy, const double* x,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_avx2(dy[r], x, g + r * cols, cols);
  }
}

constexpr Ops kAvx2Ops{matvec_avx2, matvec_t_acc_avx2, rank1_acc_avx2,
                       dot_avx2,    axpy_avx2,          "avx2"};

}  // namespace

const Ops* avx2_ops() {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return &kAvx2Ops;
  }
  return nullptr;
}

}  // namespace fairflow::kernels

#else

namespace fairflow::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace fairflow::kernels

#endif
