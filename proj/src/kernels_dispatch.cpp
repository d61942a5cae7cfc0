#include "flowhawk/kernels.hpp"

#include <atomic>

namespace flowhawk::kernels {

const Ops* avx2_ops();  // defined in kernels_avx2.cpp, null if not built

namespace {
std::atomic<bool> g_force_scalar{false};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}
}  // namespace

bool avx2_available() {
  static const bool ok = avx2_ops() != nullptr && cpu_has_avx2();
  return ok;
}

const Ops& active() {
  if (g_force_scalar.load(std::memory_order_relaxed)) return scalar();
  return avx2_available() ? *avx2_ops() : scalar();
}

void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

}  // namespace flowhawk::kernels
