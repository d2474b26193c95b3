#include "fairmarket/kernels.hpp"

#include <cmath>

namespace fm::kernels::scalar {

void axpy(double a, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a * x[i];
    y[i] = y[i] + t;
  }
}

void scale(double a, double* x, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot(const double* x, const double* y, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double max_abs(const double* x, std::size_t n) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
  return m;
}

}  // namespace fm::kernels::scalar
