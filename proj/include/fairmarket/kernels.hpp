#pragma once

// Data-parallel inner loops used by the LP tableau and by the tree
// expectation code. Each kernel has a scalar reference implementation and,
// on x86-64, an AVX2 variant; the active one is chosen once at startup from
// CPUID and can be overridden (FM_KERNELS=scalar in the environment, or
// set_kernel_isa from tests).
//
// axpy and scale round exactly like the scalar loop on every ISA (no FMA,
// element-wise operations only), so pivoting decisions never depend on the
// host CPU. dot reassociates the sum and agrees with the scalar version to
// within a few ulps of sum |x_i y_i|.

#include <cstddef>
#include <span>
#include <string_view>

namespace fm::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// ISA the dispatcher currently routes to.
Isa active_isa() noexcept;

/// True when the CPU and the build both support `isa`.
bool isa_available(Isa isa) noexcept;

/// Forces dispatch to `isa`. Returns false (and changes nothing) when unavailable.
bool set_kernel_isa(Isa isa) noexcept;

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;

/// x *= a
void scale(double a, std::span<double> x) noexcept;

double dot(std::span<const double> x, std::span<const double> y) noexcept;

/// Largest |x_i|, 0 for an empty span.
double max_abs(std::span<const double> x) noexcept;

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n) noexcept;
void scale(double a, double* x, std::size_t n) noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
double max_abs(const double* x, std::size_t n) noexcept;
}  // namespace scalar

namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n) noexcept;
void scale(double a, double* x, std::size_t n) noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
double max_abs(const double* x, std::size_t n) noexcept;
}  // namespace avx2

}  // namespace fm::kernels
