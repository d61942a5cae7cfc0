#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "flowhawk/kernels.hpp"

using namespace flowhawk;

namespace {

// Independent reference loops, written without the library helpers.
double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
double ref_sq_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}
double ref_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}
double ref_mink(const std::vector<double>& a, const std::vector<double>& b,
                double p) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::pow(std::fabs(a[i] - b[i]), p);
  return s;
}
double ref_gauss(const std::vector<double>& x, const std::vector<double>& m,
                 const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += -0.5 * (std::log(2.0 * M_PI * v[i]) + (x[i] - m[i]) * (x[i] - m[i]) / v[i]);
  return s;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo,
                               double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels match independent reference loops") {
  std::mt19937_64 rng(7);
  const auto& ops = kernels::scalar();
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 24u, 101u}) {
    auto a = random_vec(rng, n, -100, 100);
    auto b = random_vec(rng, n, -100, 100);
    auto v = random_vec(rng, n, 0.1, 50);
    CHECK(ops.dot(a.data(), b.data(), n) == doctest::Approx(ref_dot(a, b)).epsilon(1e-12));
    CHECK(ops.squared_l2(a.data(), b.data(), n) ==
          doctest::Approx(ref_sq_l2(a, b)).epsilon(1e-12));
    CHECK(ops.l1(a.data(), b.data(), n) ==
          doctest::Approx(ref_l1(a, b)).epsilon(1e-12));
    CHECK(ops.minkowski_pow_sum(a.data(), b.data(), n, 3.0) ==
          doctest::Approx(ref_mink(a, b, 3.0)).epsilon(1e-12));
    CHECK(ops.gaussian_log_density_sum(a.data(), b.data(), v.data(), n) ==
          doctest::Approx(ref_gauss(a, b, v)).epsilon(1e-12));
  }
}

TEST_CASE("standard normal log density at the mean") {
  const auto& ops = kernels::scalar();
  double x = 0.0, mean = 0.0, var = 1.0;
  double logd = ops.gaussian_log_density_sum(&x, &mean, &var, 1);
  CHECK(std::exp(logd) == doctest::Approx(0.3989423).epsilon(1e-6));
}

TEST_CASE("active dispatch names a real implementation") {
  const auto& ops = kernels::active();
  CHECK((std::string_view(ops.name) == "scalar" ||
         std::string_view(ops.name) == "avx2"));
  if (kernels::avx2_available()) CHECK(std::string_view(ops.name) == "avx2");
}

TEST_CASE("force_scalar pins the dispatch") {
  kernels::force_scalar(true);
  CHECK(std::string_view(kernels::active().name) == "scalar");
  kernels::force_scalar(false);
}

TEST_CASE("simd path agrees with scalar path") {
  if (!kernels::avx2_available()) return;
  const auto& simd = kernels::active();
  const auto& sc = kernels::scalar();
  REQUIRE(std::string_view(simd.name) == "avx2");
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(0, 64)(rng);
    auto a = random_vec(rng, n, -1000, 1000);
    auto b = random_vec(rng, n, -1000, 1000);
    auto v = random_vec(rng, n, 1e-3, 100);
    CHECK(simd.dot(a.data(), b.data(), n) ==
          doctest::Approx(sc.dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(simd.squared_l2(a.data(), b.data(), n) ==
          doctest::Approx(sc.squared_l2(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(simd.l1(a.data(), b.data(), n) ==
          doctest::Approx(sc.l1(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(simd.minkowski_pow_sum(a.data(), b.data(), n, 2.5) ==
          doctest::Approx(sc.minkowski_pow_sum(a.data(), b.data(), n, 2.5))
              .epsilon(1e-12));
    CHECK(simd.gaussian_log_density_sum(a.data(), b.data(), v.data(), n) ==
          doctest::Approx(sc.gaussian_log_density_sum(a.data(), b.data(),
                                                      v.data(), n))
              .epsilon(1e-12));
  }
}
