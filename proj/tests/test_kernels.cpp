// Scalar/AVX2 kernel equivalence. FMA reorders roundings, so comparisons use
// a tight relative tolerance rather than bit equality.

#include "doctest.h"

#include <cmath>
#include <vector>

#include "fairflow/kernels.hpp"
#include "fairflow/rng.hpp"

using namespace fairflow;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

bool close(double a, double b, double tol = 1e-12) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

}  // namespace

TEST_CASE("kernel backends agree on random inputs") {
  const auto& scalar = kernels::scalar_ops();
  const kernels::Ops* simd = kernels::avx2_ops();
  if (!simd) {
    MESSAGE("AVX2 backend unavailable; scalar-only environment");
    return;
  }
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + static_cast<std::size_t>(rng.u01() * 40);
    const std::size_t cols = 1 + static_cast<std::size_t>(rng.u01() * 40);
    const auto w = random_vec(rng, rows * cols);
    const auto b = random_vec(rng, rows);
    const auto x = random_vec(rng, cols);
    const auto dy = random_vec(rng, rows);

    std::vector<double> y1(rows), y2(rows);
    scalar.matvec(w.data(), b.data(), x.data(), y1.data(), rows, cols);
    simd->matvec(w.data(), b.data(), x.data(), y2.data(), rows, cols);
    for (std::size_t r = 0; r < rows; ++r) CHECK(close(y1[r], y2[r]));

    std::vector<double> dx1(cols, 0.5), dx2(cols, 0.5);
    scalar.matvec_t_acc(w.data(), dy.data(), dx1.data(), rows, cols);
    simd->matvec_t_acc(w.data(), dy.data(), dx2.data(), rows, cols);
    for (std::size_t c = 0; c < cols; ++c) CHECK(close(dx1[c], dx2[c]));

    std::vector<double> g1(rows * cols, 0.25), g2(rows * cols, 0.25);
    scalar.rank1_acc(g1.data(), dy.data(), x.data(), rows, cols);
    simd->rank1_acc(g2.data(), dy.data(), x.data(), rows, cols);
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(close(g1[i], g2[i]));

    CHECK(close(scalar.dot(w.data(), w.data(), rows * cols),
                simd->dot(w.data(), w.data(), rows * cols)));

    auto a1 = random_vec(rng, cols);
    auto a2 = a1;
    scalar.axpy(1.75, x.data(), a1.data(), cols);
    simd->axpy(1.75, x.data(), a2.data(), cols);
    for (std::size_t c = 0; c < cols; ++c) CHECK(close(a1[c], a2[c]));
  }
}

TEST_CASE("dispatched backend is one of the known implementations") {
  const auto& chosen = kernels::ops();
  CHECK((chosen.name == "scalar" || chosen.name == "avx2"));
  // Dispatch is sticky for the process lifetime.
  CHECK(kernels::ops().name == chosen.name);
}

TEST_CASE("scalar dot matches hand arithmetic") {
  const double a[3] = {1.0, 2.0, 3.0};
  const double b[3] = {4.0, -5.0, 6.0};
  CHECK(kernels::scalar_ops().dot(a, b, 3) == doctest::Approx(12.0).epsilon(1e-15));
}
