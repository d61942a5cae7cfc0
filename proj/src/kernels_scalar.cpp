#include "flowhawk/kernels.hpp"

#include <cmath>

namespace flowhawk::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_l2_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double l1_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

double minkowski_scalar(const double* a, const double* b, std::size_t n,
                        double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::fabs(a[i] - b[i]), p);
  return acc;
}

constexpr double kLog2Pi = 1.8378770664093454836;

double gaussian_scalar(const double* x, const double* mean, const double* var,
                       std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = x[i] - mean[i];
    acc += -0.5 * (kLog2Pi + std::log(var[i]) + d * d / var[i]);
  }
  return acc;
}

}  // namespace

const Ops& scalar() {
  static const Ops ops = {dot_scalar, squared_l2_scalar, l1_scalar,
                          minkowski_scalar, gaussian_scalar, "scalar"};
  return ops;
}

}  // namespace flowhawk::kernels
