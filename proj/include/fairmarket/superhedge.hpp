#pragma once

// Superhedging prices over the closure of the deflator polytope, the
// superhedging value process by backward induction, the optional
// decomposition X = X0 + phi.S - C of processes that are supermartingales
// under every deflator, and attainability of claims.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairmarket/deflator.hpp"
#include "fairmarket/market.hpp"

namespace fm {

inline constexpr double kIntervalTolerance = 1e-9;
inline constexpr double kSupermartingaleTolerance = 1e-9;

struct PriceInterval {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> lower_deflator;  // closure point attaining the lower bound
  std::vector<double> upper_deflator;  // closure point attaining the upper bound

  double width() const noexcept { return upper - lower; }
};

struct DecompositionResult {
  std::vector<double> value;  // X, node-indexed
  Strategy phi;
  /// Cumulative consumption on the path to each node; C[root] = 0.
  std::vector<double> consumption;
  /// theta(parent).S(n): value of the hedge carried into each node.
  std::vector<double> hedge_value;
};

enum class Attainability { strongly_regular, regular_attainable, not_attainable };

std::string_view to_string(Attainability a) noexcept;

struct AttainabilityVerdict {
  Attainability kind = Attainability::not_attainable;
  PriceInterval interval;
  /// Strictly positive supporting deflator (strongly regular / regular), or
  /// the boundary vertex attaining the supremum (not attainable).
  std::vector<double> deflator;
  /// max over the optimal face of min_n M[n]; 0 when not computed.
  double face_radius = 0.0;
};

/// Raised when optional_decomposition's supermartingale precondition fails.
class DecompositionError : public std::runtime_error {
 public:
  DecompositionError(NodeIndex node, std::vector<double> local_deflator, double excess, const std::string& what)
      : std::runtime_error(what), node_(node), local_(std::move(local_deflator)), excess_(excess) {}
  NodeIndex node() const noexcept { return node_; }
  /// One-step ratios M[c]/M[n] of the closure vertex violating the inequality.
  const std::vector<double>& local_deflator() const noexcept { return local_; }
  double excess() const noexcept { return excess_; }

 private:
  NodeIndex node_;
  std::vector<double> local_;
  double excess_;
};

/// Throws UnfairMarketError on unfair markets.
PriceInterval superhedge_price(const MarketModel& model, const Claim& claim);

/// Backward induction with one local LP per interior node.
std::vector<double> superhedge_process(const MarketModel& model, const Claim& claim);

/// Supermartingale test and decomposition of a node-indexed process.
/// `tolerance` is relative to max(1, |X[n]|).
DecompositionResult optional_decomposition(const MarketModel& model, std::span<const double> process,
                                           double tolerance = kSupermartingaleTolerance);

AttainabilityVerdict classify_attainability(const MarketModel& model, const Claim& claim);

bool completeness_via_claims(const MarketModel& model);

/// Local supremum max_m sum_c p(c|n) m_c X[c] over the one-step closure
/// polytope at `node`, with the maximising ratios and the dual hedge.
struct LocalSuperhedge {
  double value = 0.0;
  std::vector<double> ratios;
  std::vector<double> hedge;
};

LocalSuperhedge local_superhedge(const MarketModel& model, NodeIndex node, std::span<const double> process);

}  // namespace fm
