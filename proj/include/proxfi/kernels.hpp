#pragma once

// Data-parallel inner loops of the grid oracle: banded kernel columns, Toeplitz
// convolutions and fixed-order reductions. Every routine has a portable scalar
// reference and an AVX2/FMA variant; the variant is chosen once at runtime.
//
// sum() uses the same 16-lane accumulation order in both variants, so its
// result is bitwise identical across ISAs. dot() and axpy() may differ in the
// last ulp because the AVX2 path contracts multiply-add into FMA.

#include <cstddef>
#include <span>
#include <string_view>

namespace proxfi::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// True when this binary carries the variant and the CPU can execute it.
bool isa_available(Isa isa);

// Selected on first use: the best available ISA unless PROXFI_SIMD=scalar.
Isa active_isa();

// Overrides the runtime selection (tests, reproducibility runs). Requesting an
// unavailable ISA falls back to scalar.
void force_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> y);
double sum(std::span<const double> x);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace avx2

}  // namespace proxfi::kernels
