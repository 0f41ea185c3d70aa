#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels.hpp"

namespace outage::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() noexcept {
  if (const char* env = std::getenv("OUTAGE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::Scalar;
    if (want == "avx2" && available(Backend::Avx2)) return Backend::Avx2;
    if (want == "neon" && available(Backend::Neon)) return Backend::Neon;
  }
  if (available(Backend::Avx2)) return Backend::Avx2;
  if (available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{&table(detect())};
  return slot;
}

std::atomic<Backend>& backend_slot() noexcept {
  static std::atomic<Backend> slot{detect()};
  return slot;
}

}  // namespace

bool available(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2();
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& table(Backend b) {
  if (!available(b)) throw std::invalid_argument("SIMD backend not available: " + std::string(name(b)));
  switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::Avx2:
      return detail::avx2_table;
#endif
#if defined(__aarch64__)
    case Backend::Neon:
      return detail::neon_table;
#endif
    default:
      return detail::scalar_table;
  }
}

Backend active_backend() noexcept { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  const KernelTable& t = table(b);
  active_slot().store(&t, std::memory_order_relaxed);
  backend_slot().store(b, std::memory_order_relaxed);
}

const KernelTable& active() noexcept { return *active_slot().load(std::memory_order_relaxed); }

}  // namespace outage::simd
