#include <cmath>
#include <vector>

#include "doctest.h"
#include "fairmarket/kernels.hpp"
#include "fairmarket/rng.hpp"

using namespace fm;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-10.0, 10.0);
  return v;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar kernels on hand-checked inputs") {
    std::vector<double> x{1, -2, 3}, y{4, 5, 6};
    kernels::scalar::axpy(2.0, x.data(), y.data(), 3);
    CHECK(y == std::vector<double>{6, 1, 12});
    kernels::scalar::scale(-0.5, y.data(), 3);
    CHECK(y == std::vector<double>{-3, -0.5, -6});
    CHECK(kernels::scalar::dot(x.data(), y.data(), 3) == doctest::Approx(-3 + 1 - 18));
    CHECK(kernels::scalar::max_abs(y.data(), 3) == 6.0);
    CHECK(kernels::scalar::max_abs(y.data(), 0) == 0.0);
  }

  TEST_CASE("avx2 kernels match the scalar reference at every tail length") {
    if (!kernels::isa_available(kernels::Isa::avx2)) return;
    Rng rng(7);
    for (std::size_t n = 0; n <= 37; ++n) {
      const auto x = random_vector(rng, n);
      const auto y0 = random_vector(rng, n);
      const double a = rng.uniform(-3.0, 3.0);

      auto ys = y0, yv = y0;
      kernels::scalar::axpy(a, x.data(), ys.data(), n);
      kernels::avx2::axpy(a, x.data(), yv.data(), n);
      CHECK(ys == yv);  // elementwise, no contraction: bit-identical

      auto ss = y0, sv = y0;
      kernels::scalar::scale(a, ss.data(), n);
      kernels::avx2::scale(a, sv.data(), n);
      CHECK(ss == sv);

      double mag = 0.0;
      for (std::size_t k = 0; k < n; ++k) mag += std::fabs(x[k] * y0[k]);
      const double ds = kernels::scalar::dot(x.data(), y0.data(), n);
      const double dv = kernels::avx2::dot(x.data(), y0.data(), n);
      CHECK(std::fabs(ds - dv) <= 1e-14 * std::max(1.0, mag));

      CHECK(kernels::scalar::max_abs(x.data(), n) == kernels::avx2::max_abs(x.data(), n));
    }
  }

  TEST_CASE("max_abs ignores sign and finds the last-lane maximum") {
    std::vector<double> v(13, 1.0);
    v[12] = -9.0;
    CHECK(kernels::scalar::max_abs(v.data(), v.size()) == 9.0);
    if (kernels::isa_available(kernels::Isa::avx2)) CHECK(kernels::avx2::max_abs(v.data(), v.size()) == 9.0);
  }

  TEST_CASE("dispatch can be forced and restored") {
    const kernels::Isa before = kernels::active_isa();
    CHECK(kernels::set_kernel_isa(kernels::Isa::scalar));
    CHECK(kernels::active_isa() == kernels::Isa::scalar);
    std::vector<double> x{1, 2}, y{3, 4};
    CHECK(kernels::dot(x, y) == 11.0);
    CHECK(kernels::set_kernel_isa(before));
    CHECK(kernels::isa_name(kernels::Isa::scalar) == "scalar");
  }
}
