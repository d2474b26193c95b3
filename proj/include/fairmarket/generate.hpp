#pragma once

// Random fair markets for test corpora, reproducible from a 64-bit seed
// (std::mt19937_64).
//
// One-step deflator ratios m_c > 0 with sum_c p(c|n) m_c = 1 are drawn
// first; every risky child price vector is then rescaled so that
// sum_c p(c|n) m_c S(c) = S(n). The constant bond is a martingale under the
// same ratios, so the product of the ratios is a strictly positive deflator.

#include <cstdint>

#include "fairmarket/market.hpp"

namespace fm {

struct GeneratorOptions {
  std::uint64_t seed = 0;
  int depth = 2;      // 0..6
  int branching = 2;  // 1..4; interior nodes get between min(2, b) and b children
  int assets = 2;     // 1..5, asset 0 is the bond
  /// Adds a copy of asset 0 worth `bonus` more on one child subtree, which
  /// creates a one-step arbitrage.
  bool arbitrage = false;
};

/// Throws ModelError on guard violations.
MarketModel generate_market(const GeneratorOptions& options);

/// Nonnegative random payoff, uniform on [0, 2) per leaf, with roughly one
/// leaf in five set to zero.
Claim random_claim(const MarketModel& model, std::uint64_t seed, std::string name = "claim");

}  // namespace fm
