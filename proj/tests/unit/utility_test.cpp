#include <cmath>

#include "doctest.h"
#include "fairmarket/errors.hpp"
#include "fairmarket/oracle.hpp"
#include "fairmarket/superhedge.hpp"
#include "fairmarket/utility_dual.hpp"
#include "fixtures.hpp"

using namespace fm;
using namespace fmtest;

namespace {

const double kT1Value = -1.0 - std::log(8.0 / 9) / 3;

std::vector<Utility> utilities() { return {Utility::log(), Utility::power(0.5), Utility::power(-1.0)}; }

double dual_value_at(const MarketModel& m, const Utility& u, double y, std::span<const double> defl) {
  double s = 0.0;
  for (NodeIndex l : m.tree().leaves()) s += m.tree().path_prob(l) * u.conjugate(y * defl[l]);
  return s;
}

}  // namespace

TEST_SUITE("utility") {
  TEST_CASE("conjugates match a brute-force supremum") {
    for (const Utility& u : {Utility::log(), Utility::power(0.5), Utility::power(-1.0), Utility::power(0.95)}) {
      for (double y : {0.3, 1.0, 2.5}) {
        double best = -1e300;
        const double xs = u.inverse_marginal(y);
        for (int k = -2000; k <= 2000; ++k) {
          const double x = xs * std::exp(k * 1e-3);
          best = std::max(best, u.value(x) - x * y);
        }
        CHECK(u.conjugate(y) == doctest::Approx(best).epsilon(1e-6));
        CHECK(u.marginal(u.inverse_marginal(y)) == doctest::Approx(y).epsilon(1e-12));
        const double h = 1e-5 * y;
        CHECK(u.conjugate_slope(y) == doctest::Approx((u.conjugate(y + h) - u.conjugate(y - h)) / (2 * h)).epsilon(1e-6));
        CHECK(u.conjugate_curvature(y) ==
              doctest::Approx((u.conjugate_slope(y + h) - u.conjugate_slope(y - h)) / (2 * h)).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("parsing utility names") {
    CHECK(Utility::parse("log").kind() == Utility::Kind::log);
    CHECK(Utility::parse("power:0.5").exponent() == 0.5);
    CHECK(Utility::parse("power:-1").exponent() == -1.0);
    CHECK_THROWS_AS(Utility::parse("power:1"), ModelError);
    CHECK_THROWS_AS(Utility::parse("power:0"), ModelError);
    CHECK_THROWS_AS(Utility::parse("power:abc"), ModelError);
    CHECK_THROWS_AS(Utility::parse("exp"), ModelError);
    CHECK(Utility::parse(Utility::power(-2.5).name()).exponent() == -2.5);
  }

  TEST_CASE("t1 log dual") {
    const DualSolution d = solve_dual(t1(), Utility::log(), 1.0);
    CHECK(max_abs_diff(d.deflator.values(), t1_family(4.0 / 3)) < 1e-8);
    CHECK(d.value == doctest::Approx(kT1Value).epsilon(1e-12));
    CHECK(d.gap <= 1e-9);
    CHECK_THROWS_AS(solve_dual(t1(), Utility::log(), 0.0), ModelError);
    CHECK_THROWS_AS(solve_dual(b1_arb(), Utility::log(), 1.0), UnfairMarketError);
  }

  TEST_CASE("dual minimiser does not move with y") {
    const MarketModel m = generate_market(corpus_options(6));
    for (const Utility& u : utilities()) {
      const DualSolution a = solve_dual(m, u, 0.5);
      const DualSolution b = solve_dual(m, u, 3.0);
      CHECK(max_abs_diff(a.deflator.values(), b.deflator.values()) < 1e-7);
    }
  }

  TEST_CASE("b1 dual is the unique deflator for every utility") {
    for (const Utility& u : utilities()) {
      const DualSolution d = solve_dual(b1(), u, 1.7);
      CHECK(max_abs_diff(d.deflator.values(), std::vector<double>{1.0, 2.0 / 3, 4.0 / 3}) < 1e-12);
    }
  }

  TEST_CASE("dual value is below every sampled deflator") {
    const MarketModel m = generate_market(corpus_options(9));
    const auto samples = sample_deflators(m, 20, 3);
    for (const Utility& u : utilities()) {
      const DualSolution d = solve_dual(m, u, 1.3);
      for (const Deflator& s : samples) CHECK(d.value <= dual_value_at(m, u, 1.3, s.values()) + 1e-8);
    }
  }

  TEST_CASE("t1 log primal") {
    const PrimalSolution p = solve_primal(t1(), Utility::log(), 1.0);
    CHECK(p.y == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(max_abs_diff(p.wealth, std::vector<double>{1.0, 1.5, 1.0, 0.75}) < 1e-9);
    CHECK(p.strategy(0, 0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(p.strategy(0, 1) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::fabs(p.value - std::log(9.0 / 8) / 3) <= 1e-8);
    CHECK(p.budget_residual <= 1e-8);
  }

  TEST_CASE("b1 log primal and log scaling") {
    const PrimalSolution p = solve_primal(b1(), Utility::log(), 1.0);
    CHECK(p.wealth[1] == doctest::Approx(1.5));
    CHECK(p.wealth[2] == doctest::Approx(0.75));
    CHECK(std::fabs(p.value - std::log(9.0 / 8) / 2) <= 1e-10);
    const MarketModel m = t1();
    const PrimalSolution one = solve_primal(m, Utility::log(), 1.0);
    const PrimalSolution two = solve_primal(m, Utility::log(), 2.0);
    for (NodeIndex n = 0; n < m.nodes(); ++n) CHECK(two.wealth[n] == doctest::Approx(2.0 * one.wealth[n]));
    CHECK(two.strategy(0, 1) == doctest::Approx(2.0 * one.strategy(0, 1)));
    CHECK(two.value == doctest::Approx(one.value + std::log(2.0)).epsilon(1e-10));
  }

  TEST_CASE("value functions are conjugate") {
    const MarketModel m = t1();
    const std::vector<double> grid{0.5, 1.0, 2.0};
    const ValueTables t = value_functions(m, Utility::log(), grid, grid);
    for (double r : t.u_residual) CHECK(r <= 2e-2);
    for (double r : t.v_residual) CHECK(r <= 2e-2);
    const double u1 = std::log(9.0 / 8) / 3;
    for (std::size_t j = 0; j < grid.size(); ++j) CHECK(t.v[j] == doctest::Approx(u1 - 1.0 - std::log(grid[j])).epsilon(1e-10));

    for (const Utility& u : utilities()) {
      const PrimalSolution p = solve_primal(m, u, 1.4);
      const std::vector<double> xs{1.4}, ys{p.y};
      const ValueTables pair = value_functions(m, u, xs, ys);
      CHECK(pair.u_residual[0] <= 1e-6);
      CHECK(pair.v_residual[0] <= 1e-6);
    }
  }

  TEST_CASE("minimax characterisation on t1 and b1") {
    const MarketModel m = t1();
    const DualSolution d = solve_dual(m, Utility::log(), 1.0);
    const MinimaxCheck yes = verify_minimax(m, Utility::log(), d.deflator, 1.0);
    CHECK(yes.minimax);
    CHECK(*yes.y == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(*yes.utility_gap <= 1e-7);
    const MinimaxCheck no = verify_minimax(m, Utility::log(), Deflator(m, t1_family(1.0)), 1.0);
    CHECK(!no.minimax);
    CHECK(!no.reason.empty());
    for (const Utility& u : utilities()) {
      CHECK(verify_minimax(b1(), u, Deflator(b1(), {1.0, 2.0 / 3, 4.0 / 3}), 0.7).minimax);
    }
  }

  TEST_CASE("Davis prices") {
    const MarketModel m = t1();
    const DavisPrice dp = davis_price(m, Utility::log(), 1.0, digital_up());
    CHECK(std::fabs(dp.price - 2.0 / 9) <= 1e-9);
    CHECK(dp.residual <= 1e-8);
    const PriceInterval iv = superhedge_price(m, digital_up());
    CHECK(dp.price >= iv.lower);
    CHECK(dp.price <= iv.upper);
    CHECK(davis_price(m, Utility::power(0.5), 1.0, Claim::from_asset(m, 1)).price == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(davis_price(m, Utility::power(-1.0), 2.0, Claim({0.0, 0.0, 0.0})).price == 0.0);
  }

  TEST_CASE("augmentation leaves the optimum unchanged") {
    const MarketModel m = t1();
    const Augmentation a = augment_market(m, Utility::log(), 1.0, digital_up());
    CHECK(a.price == doctest::Approx(2.0 / 9).epsilon(1e-9));
    CHECK(a.diagnostics.fair);
    CHECK(std::fabs(a.diagnostics.v_after - a.diagnostics.v_before) <= 1e-8);
    CHECK(a.diagnostics.max_deflator_change <= 1e-7);
    CHECK(std::fabs(a.diagnostics.u_after - a.diagnostics.u_before) <= 1e-7);
    CHECK(a.market.assets() == 3);

    const Augmentation dup = augment_market(m, Utility::log(), 1.0, Claim::from_asset(m, 1));
    CHECK(dup.diagnostics.fair);
    CHECK(!dup.diagnostics.complete_after);

    const Augmentation bc = augment_market(b1(), Utility::power(0.5), 1.0, call_b1());
    CHECK(bc.diagnostics.complete_before);
    CHECK(bc.diagnostics.complete_after);
  }

  TEST_CASE("growth-optimal wealth is the reciprocal deflator") {
    const MarketModel m = t1();
    const PrimalSolution g = growth_optimal(m, 1.0);
    CHECK(max_abs_diff(g.wealth, std::vector<double>{1.0, 1.5, 1.0, 0.75}) < 1e-9);
    for (NodeIndex n = 0; n < m.nodes(); ++n) CHECK(std::fabs(g.deflator[n] * g.wealth[n] - 1.0) <= 1e-8);
    const PrimalSolution g2 = growth_optimal(m, 2.0);
    CHECK(max_abs_diff(g2.deflator.values(), g.deflator.values()) < 1e-9);
    CHECK(g2.wealth[1] == doctest::Approx(3.0));
    CHECK(growth_optimal(b1(), 1.0).wealth[2] == doctest::Approx(0.75));
  }

  TEST_CASE("dual gradient matches central differences") {
    const MarketModel m = generate_market(corpus_options(3));
    const auto samples = sample_deflators(m, 10, 19);
    for (const Utility& u : utilities()) {
      const ConvexProblem p = dual_problem(m, u, 0.8);
      for (const Deflator& d : samples) {
        std::vector<double> g(m.nodes());
        p.gradient(d.values(), g);
        const auto fd = finite_difference_gradient(p.objective, d.values());
        double scale = 0.0, err = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
          scale = std::max(scale, std::fabs(g[j]));
          err = std::max(err, std::fabs(g[j] - fd[j]));
        }
        CHECK(err <= 1e-5 * std::max(scale, 1e-12));
      }
    }
  }
}
