#pragma once
// Data-parallel inner loops shared by the classifiers: dot products, distance
// accumulations and Gaussian log-density sums. A scalar reference
// implementation always exists; an AVX2 variant is selected at runtime when
// the CPU supports it. The two paths are equivalence-tested.

#include <cstddef>
#include <string_view>

namespace flowhawk::kernels {

struct Ops {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*squared_l2)(const double* a, const double* b, std::size_t n);
  // sum_i |a[i] - b[i]|
  double (*l1)(const double* a, const double* b, std::size_t n);
  // sum_i |a[i] - b[i]|^p  (p >= 1)
  double (*minkowski_pow_sum)(const double* a, const double* b, std::size_t n,
                              double p);
  // sum_i -0.5 * (log(2*pi*var[i]) + (x[i]-mean[i])^2 / var[i])
  double (*gaussian_log_density_sum)(const double* x, const double* mean,
                                     const double* var, std::size_t n);
  const char* name;
};

const Ops& scalar();

// The best implementation for this machine (scalar unless AVX2 is available).
// Dispatch is resolved once; force_scalar() pins it for equivalence tests.
const Ops& active();
void force_scalar(bool on);

// True if an AVX2 variant was compiled in and the CPU supports it.
bool avx2_available();

}  // namespace flowhawk::kernels
