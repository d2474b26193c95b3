#pragma once

// The martingale-deflator polytope of a market: strictly positive processes
// M with M[root] = 1 under which every M S^i is a P-martingale. Fairness,
// completeness and the deflator <-> equivalent-measure correspondence all
// live here.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fairmarket/lp.hpp"
#include "fairmarket/market.hpp"

namespace fm {

inline constexpr double kPositivityThreshold = 1e-10;
inline constexpr double kDeflatorMartingaleTolerance = 1e-9;

/// Validated martingale deflator, node-indexed.
class Deflator {
 public:
  /// Throws ModelError unless `values` is strictly positive, normalised and
  /// a martingale deflator for `model` within kDeflatorMartingaleTolerance.
  Deflator(const MarketModel& model, std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  double operator[](NodeIndex n) const { return values_.at(n); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

/// Equivalent martingale measure as leaf weights q = dQ/dP * P.
class MeasureWeights {
 public:
  explicit MeasureWeights(std::vector<double> q);
  std::span<const double> values() const noexcept { return q_; }
  double operator[](std::size_t leaf_pos) const { return q_.at(leaf_pos); }

 private:
  std::vector<double> q_;
};

/// Equality system over node variables M: one martingale row per
/// (interior node, asset) and the normalisation M[root] = 1.
struct DeflatorPolytope {
  Matrix constraints;
  std::vector<double> rhs;

  std::size_t variables() const noexcept { return constraints.cols(); }
};

/// One-step arbitrage at a node: zero-or-negative cost, nonnegative payoff,
/// strictly positive at some child.
struct ArbitrageCertificate {
  NodeIndex node = 0;
  std::vector<double> holdings;
  double cost = 0.0;
  std::vector<double> payoffs;  // per child, in child order
};

struct FairnessReport {
  bool fair = false;
  /// max over the polytope of min_n M[n]; nullopt when the polytope is empty.
  std::optional<double> interior_radius;
  std::optional<Deflator> witness;
  std::optional<ArbitrageCertificate> certificate;
  /// Radius was positive but at or below kPositivityThreshold.
  bool numerically_unfair = false;
};

struct CompletenessReport {
  bool complete = false;
  std::size_t dimension = 0;  // sum over interior nodes of children - local rank
};

DeflatorPolytope build_polytope(const MarketModel& model);

FairnessReport check_fair(const MarketModel& model);

/// Checks `cert` against the model: cost <= tol, payoffs >= -tol, some > tol.
bool certificate_valid(const MarketModel& model, const ArbitrageCertificate& cert, double tol = 1e-9);

/// Throws UnfairMarketError if the market is not fair.
CompletenessReport check_complete(const MarketModel& model);

MeasureWeights deflator_to_measure(const MarketModel& model, const Deflator& m);
Deflator measure_to_deflator(const MarketModel& model, const MeasureWeights& q);

/// Strictly positive deflators: half the fairness witness plus half a random
/// convex combination of polytope vertices. Vertices come from LPs with
/// random objectives, so the routine scales past the enumeration guard.
/// Throws UnfairMarketError on unfair markets.
std::vector<Deflator> sample_deflators(const MarketModel& model, std::size_t count, std::uint64_t seed);

/// Local one-step polytope at an interior node: ratios m_c = M[c]/M[n] with
/// sum_c p(c|n) m_c S[i][c] = S[i][n].
LinearProgram local_program(const MarketModel& model, NodeIndex node, std::span<const double> child_values,
                            Sense sense);

/// Rank of the assets x children price matrix at an interior node.
std::size_t local_rank(const MarketModel& model, NodeIndex node);

/// Requires a fair market; throws UnfairMarketError otherwise. Returns the witness.
const Deflator& require_fair(const FairnessReport& report);

}  // namespace fm
