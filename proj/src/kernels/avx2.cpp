// Compiled with -mavx2 only; callers reach these through the dispatcher
// after a CPUID check.
#include "fairmarket/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace fm::kernels::avx2 {

namespace {
constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}
}  // namespace

void axpy(double a, const double* x, double* y, std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + kLanes);
    y0 = _mm256_add_pd(y0, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    y1 = _mm256_add_pd(y1, _mm256_mul_pd(va, _mm256_loadu_pd(x + i + kLanes)));
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + kLanes, y1);
  }
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) {
    const double t = a * x[i];
    y[i] = y[i] + t;
  }
}

void scale(double a, double* x, std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

double dot(const double* x, const double* y, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + kLanes),
                                             _mm256_loadu_pd(y + i + kLanes)));
  }
  for (; i + kLanes <= n; i += kLanes) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double max_abs(const double* x, std::size_t n) noexcept {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
  return r;
}

}  // namespace fm::kernels::avx2
