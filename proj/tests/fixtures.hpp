#pragma once

#include <cmath>
#include <vector>

#include "fairmarket/generate.hpp"
#include "fairmarket/market.hpp"

namespace fmtest {

using namespace fm;

inline ScenarioTree one_period(std::vector<double> probs) {
  std::vector<NodeSpec> specs{{"r", std::nullopt, 1.0}};
  const char* names[] = {"a", "b", "c", "d", "e"};
  for (std::size_t k = 0; k < probs.size(); ++k) specs.push_back({names[k], "r", probs[k]});
  return ScenarioTree::create(specs);
}

// Binomial: bond (1; 1, 1), stock (1; 2, 0.5), P = (1/2, 1/2).
inline MarketModel b1() {
  Matrix s(2, 3);
  const double bond[] = {1, 1, 1}, stock[] = {1, 2, 0.5};
  for (int n = 0; n < 3; ++n) {
    s(0, n) = bond[n];
    s(1, n) = stock[n];
  }
  return build_market(one_period({0.5, 0.5}), s, {"bond", "stock"});
}

// b1 plus an asset paying (2.1, 0.6) for the stock's price of 1.
inline MarketModel b1_arb() {
  Matrix s(3, 3);
  const double rows[3][3] = {{1, 1, 1}, {1, 2, 0.5}, {1, 2.1, 0.6}};
  for (int i = 0; i < 3; ++i)
    for (int n = 0; n < 3; ++n) s(i, n) = rows[i][n];
  return build_market(one_period({0.5, 0.5}), s, {"bond", "stock", "better"});
}

// Trinomial: bond (1; 1, 1, 1), stock (1; 2, 1, 0.5), P uniform.
inline MarketModel t1() {
  Matrix s(2, 4);
  const double bond[] = {1, 1, 1, 1}, stock[] = {1, 2, 1, 0.5};
  for (int n = 0; n < 4; ++n) {
    s(0, n) = bond[n];
    s(1, n) = stock[n];
  }
  return build_market(one_period({1.0 / 3, 1.0 / 3, 1.0 / 3}), s, {"bond", "stock"});
}

// The t1 deflator family M = (1; 0.5t, 3 - 1.5t, t), t in [0, 2].
inline std::vector<double> t1_family(double t) { return {1.0, 0.5 * t, 3.0 - 1.5 * t, t}; }

inline Claim call_b1() { return Claim({1.0, 0.0}, "call"); }
inline Claim digital_up() { return Claim({1.0, 0.0, 0.0}, "digital-up"); }

/// Fair generated market number k of a corpus (depth <= 4, branching <= 3, assets <= 3).
inline GeneratorOptions corpus_options(std::uint64_t k, int max_depth = 4) {
  GeneratorOptions o;
  o.seed = 1000 + k;
  o.depth = 1 + static_cast<int>(k % static_cast<std::uint64_t>(max_depth));
  o.branching = 2 + static_cast<int>((k / 4) % 2);
  o.assets = 1 + static_cast<int>((k / 8) % 3);
  return o;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return m;
}

}  // namespace fmtest
