#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "flexpilot/simd/kernels.hpp"

namespace flexpilot::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* select_default() {
  const char* env = std::getenv("FLEXPILOT_SIMD");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return &scalar_kernels();
  if (choice == "avx2") {
    if (const KernelTable* t = avx2_kernels()) return t;
    throw std::runtime_error("FLEXPILOT_SIMD=avx2 requested but AVX2 kernels are unavailable");
  }
  if (choice != "auto") throw std::runtime_error("FLEXPILOT_SIMD must be scalar, avx2 or auto");
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{select_default()};
  return slot;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &detail::squared_distances_scalar,
                                 &detail::sliding_correlation_scalar};
  return table;
}

const KernelTable* avx2_kernels() {
#if defined(FLEXPILOT_HAVE_AVX2)
  static const KernelTable table{"avx2", &detail::squared_distances_avx2,
                                 &detail::sliding_correlation_avx2};
  static const bool supported = cpu_has_avx2();
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void set_active_kernels(const KernelTable& table) {
  active_slot().store(&table, std::memory_order_release);
}

}  // namespace flexpilot::simd
