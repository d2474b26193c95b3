#include <atomic>
#include <cstdlib>
#include <cstring>

#include "fairmarket/kernels.hpp"

namespace fm::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(FM_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* forced = std::getenv("FM_KERNELS"); forced && std::strcmp(forced, "scalar") == 0) {
    return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) noexcept { return isa == Isa::scalar || cpu_has_avx2(); }

bool set_kernel_isa(Isa isa) noexcept {
  if (!isa_available(isa)) return false;
  current().store(isa, std::memory_order_relaxed);
  return true;
}

#if defined(FM_HAVE_AVX2_TU)
#define FM_DISPATCH(fn, ...) \
  (active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define FM_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  FM_DISPATCH(axpy, a, x.data(), y.data(), y.size());
}

void scale(double a, std::span<double> x) noexcept { FM_DISPATCH(scale, a, x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return FM_DISPATCH(dot, x.data(), y.data(), x.size());
}

double max_abs(std::span<const double> x) noexcept {
  return FM_DISPATCH(max_abs, x.data(), x.size());
}

#undef FM_DISPATCH

}  // namespace fm::kernels
