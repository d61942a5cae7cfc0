// AVX2 variants of the arithmetic kernels. Compiled with -mavx2 -mfma; only
// reached when runtime dispatch confirms CPU support.

#include "flowhawk/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace flowhawk::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(acc) + tail;
}

double squared_l2_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    tail += d * d;
  }
  return hsum(acc) + tail;
}

double l1_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += std::fabs(a[i] - b[i]);
  return hsum(acc) + tail;
}

// pow() has no vector form here; the general Minkowski path stays scalar and
// the dispatcher only accelerates the p=1 and p=2 cases it is built from.
double minkowski_avx2(const double* a, const double* b, std::size_t n, double p) {
  if (p == 1.0) return l1_avx2(a, b, n);
  if (p == 2.0) return squared_l2_avx2(a, b, n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::fabs(a[i] - b[i]), p);
  return acc;
}

constexpr double kLog2Pi = 1.8378770664093454836;

double gaussian_avx2(const double* x, const double* mean, const double* var,
                     std::size_t n) {
  // log(var) stays scalar; the quadratic term vectorizes.
  __m256d quad = _mm256_setzero_pd();
  double logs = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mean + i));
    __m256d v = _mm256_loadu_pd(var + i);
    quad = _mm256_add_pd(quad, _mm256_div_pd(_mm256_mul_pd(d, d), v));
    logs += std::log(var[i]) + std::log(var[i + 1]) + std::log(var[i + 2]) +
            std::log(var[i + 3]);
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    double d = x[i] - mean[i];
    tail += std::log(var[i]) + d * d / var[i];
  }
  return -0.5 * (static_cast<double>(n) * kLog2Pi + logs + hsum(quad) + tail);
}

}  // namespace

const Ops* avx2_ops() {
  static const Ops ops = {dot_avx2, squared_l2_avx2, l1_avx2, minkowski_avx2,
                          gaussian_avx2, "avx2"};
  return &ops;
}

}  // namespace flowhawk::kernels

#else

namespace flowhawk::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace flowhawk::kernels

#endif
