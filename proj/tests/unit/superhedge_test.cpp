#include <cmath>

#include "doctest.h"
#include "fairmarket/errors.hpp"
#include "fairmarket/superhedge.hpp"
#include "fixtures.hpp"

using namespace fm;
using namespace fmtest;

TEST_SUITE("superhedge") {
  TEST_CASE("b1 call is priced uniquely at one third") {
    const MarketModel m = b1();
    const PriceInterval iv = superhedge_price(m, call_b1());
    CHECK(iv.upper == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(iv.width() <= 1e-10);
    const AttainabilityVerdict v = classify_attainability(m, call_b1());
    CHECK(v.kind == Attainability::strongly_regular);
  }

  TEST_CASE("t1 digital: interval, process and attainability") {
    const MarketModel m = t1();
    const PriceInterval iv = superhedge_price(m, digital_up());
    CHECK(std::fabs(iv.lower) <= 1e-9);
    CHECK(std::fabs(iv.upper - 1.0 / 3) <= 1e-9);
    const auto u = superhedge_process(m, digital_up());
    CHECK(max_abs_diff(u, std::vector<double>{1.0 / 3, 1.0, 0.0, 0.0}) < 1e-12);
    const AttainabilityVerdict v = classify_attainability(m, digital_up());
    CHECK(v.kind == Attainability::not_attainable);
    CHECK(v.deflator[2] <= 1e-9);  // the witness puts no weight on b
    CHECK(to_string(v.kind) == "not-attainable");
  }

  TEST_CASE("t1 stock payoff is strongly regular with value one") {
    const MarketModel m = t1();
    const Claim stock = Claim::from_asset(m, 1);
    const AttainabilityVerdict v = classify_attainability(m, stock);
    CHECK(v.kind == Attainability::strongly_regular);
    CHECK(v.interval.upper == doctest::Approx(1.0));
  }

  TEST_CASE("a strictly positive deflator on the optimal face forces replication") {
    // Complementary slackness: a positive maximiser makes the superhedge hold
    // with equality everywhere, so the price is unique. Wide intervals are
    // therefore never attained by an equivalent deflator on a finite tree.
    for (std::uint64_t k = 0; k < 16; ++k) {
      const MarketModel m = generate_market(corpus_options(k, 2));
      const AttainabilityVerdict v = classify_attainability(m, random_claim(m, 500 + k));
      if (v.kind == Attainability::strongly_regular) continue;
      CHECK(v.kind == Attainability::not_attainable);
      CHECK(v.face_radius <= kPositivityThreshold);
    }
  }

  TEST_CASE("decomposition of the t1 digital superhedge") {
    const MarketModel m = t1();
    const auto u = superhedge_process(m, digital_up());
    const DecompositionResult d = optional_decomposition(m, u);
    CHECK(d.phi(0, 0) == doctest::Approx(-1.0 / 3));
    CHECK(d.phi(0, 1) == doctest::Approx(2.0 / 3));
    CHECK(max_abs_diff(d.hedge_value, std::vector<double>{1.0 / 3, 1.0, 1.0 / 3, 0.0}) < 1e-12);
    CHECK(d.consumption[0] == 0.0);
    CHECK(d.consumption[2] == doctest::Approx(1.0 / 3));
  }

  TEST_CASE("decomposition rejects a process that some deflator raises") {
    const MarketModel m = t1();
    // X = (0.2; 1, 0, 0) is a martingale under t = 1.2 but not a
    // supermartingale under the vertex t = 2.
    const std::vector<double> x{0.2, 1.0, 0.0, 0.0};
    try {
      optional_decomposition(m, x);
      FAIL("expected DecompositionError");
    } catch (const DecompositionError& e) {
      CHECK(e.node() == 0);
      CHECK(e.excess() == doctest::Approx(1.0 / 3 - 0.2));
      CHECK(e.local_deflator().size() == 3);
    }
  }

  TEST_CASE("unfair markets are refused") {
    CHECK_THROWS_AS(superhedge_price(b1_arb(), call_b1()), UnfairMarketError);
  }

  TEST_CASE("completeness via unit claims matches the rank test") {
    CHECK(completeness_via_claims(b1()));
    CHECK(!completeness_via_claims(t1()));
  }

  TEST_CASE("DP equals LP and the hedge dominates on generated markets") {
    for (std::uint64_t k = 0; k < 24; ++k) {
      const MarketModel m = generate_market(corpus_options(k));
      const Claim xi = random_claim(m, 77 + k);
      const PriceInterval iv = superhedge_price(m, xi);
      const auto u = superhedge_process(m, xi);
      CHECK(std::fabs(u[0] - iv.upper) <= 1e-8);
      CHECK(iv.lower <= iv.upper + 1e-12);
      const DecompositionResult d = optional_decomposition(m, u);
      for (NodeIndex l : m.tree().leaves()) CHECK(d.hedge_value[l] >= xi[m.tree().leaf_position(l)] - 1e-9);
    }
  }
}
