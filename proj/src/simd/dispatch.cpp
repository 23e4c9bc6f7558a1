#include <atomic>
#include <cstdlib>
#include <string>

#include "proxfi/kernels.hpp"

namespace proxfi::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(PROXFI_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("PROXFI_SIMD")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) isa = Isa::scalar;
  selected().store(static_cast<int>(isa), std::memory_order_relaxed);
}

#if defined(PROXFI_HAVE_AVX2)
#define PROXFI_DISPATCH(fn, ...) \
  (active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define PROXFI_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  return PROXFI_DISPATCH(dot, a.data(), b.data(), n);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size() < y.size() ? x.size() : y.size();
  PROXFI_DISPATCH(axpy, alpha, x.data(), y.data(), n);
}

void scale(double alpha, std::span<double> y) { PROXFI_DISPATCH(scale, alpha, y.data(), y.size()); }

double sum(std::span<const double> x) { return PROXFI_DISPATCH(sum, x.data(), x.size()); }

#undef PROXFI_DISPATCH

}  // namespace proxfi::kernels
