#pragma once

// Scenario trees, price models, trading strategies and the self-financing
// algebra on them.
//
// Node indices are positions in the tree's node list, which is always in
// topological (parent-before-child) order. Holdings chosen at a node apply on
// the edges to its children; a strategy's entries at leaves are ignored.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairmarket/matrix.hpp"

namespace fm {

using NodeIndex = std::size_t;

inline constexpr double kProbabilitySumTolerance = 1e-12;
inline constexpr double kSelfFinancingTolerance = 1e-10;

struct NodeSpec {
  std::string id;
  std::optional<std::string> parent;  // nullopt for the root
  double prob = 1.0;                  // conditional probability of the edge from the parent
};

/// Finite event tree carrying the original probability on its branches.
class ScenarioTree {
 public:
  /// Validates and builds the tree. Parents must precede their children.
  /// Throws ModelError on any violated invariant.
  static ScenarioTree create(std::span<const NodeSpec> nodes);

  std::size_t size() const noexcept { return ids_.size(); }
  int horizon() const noexcept { return horizon_; }
  static constexpr NodeIndex root() noexcept { return 0; }

  const std::string& id(NodeIndex n) const { return ids_.at(n); }
  std::optional<NodeIndex> find(const std::string& id) const;
  std::optional<NodeIndex> parent(NodeIndex n) const;
  int time(NodeIndex n) const { return times_.at(n); }
  double branch_prob(NodeIndex n) const { return branch_probs_.at(n); }
  double path_prob(NodeIndex n) const { return path_probs_.at(n); }
  std::span<const NodeIndex> children(NodeIndex n) const { return children_.at(n); }
  bool is_leaf(NodeIndex n) const { return children_.at(n).empty(); }

  std::span<const NodeIndex> leaves() const noexcept { return leaves_; }
  std::span<const NodeIndex> interior() const noexcept { return interior_; }

  /// Position of leaf `n` within leaves().
  std::size_t leaf_position(NodeIndex n) const { return leaf_pos_.at(n); }

  /// Leaves in the subtree of `n`.
  std::vector<NodeIndex> leaves_below(NodeIndex n) const;

  std::vector<NodeSpec> specs() const;

  friend bool operator==(const ScenarioTree& a, const ScenarioTree& b) {
    return a.ids_ == b.ids_ && a.parents_ == b.parents_ && a.branch_probs_ == b.branch_probs_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<std::ptrdiff_t> parents_;
  std::vector<int> times_;
  std::vector<double> branch_probs_;
  std::vector<double> path_probs_;
  std::vector<std::vector<NodeIndex>> children_;
  std::vector<NodeIndex> leaves_;
  std::vector<NodeIndex> interior_;
  std::vector<std::size_t> leaf_pos_;
  int horizon_ = 0;
};

/// Scenario tree plus nonnegative asset prices S[i][node].
class MarketModel {
 public:
  /// Validates prices (nonnegative, positive at the root, positive aggregate,
  /// absorbing zero) and derives S*. `prices` is assets x nodes.
  static MarketModel create(ScenarioTree tree, Matrix prices, std::vector<std::string> asset_names = {});

  const ScenarioTree& tree() const noexcept { return tree_; }
  std::size_t assets() const noexcept { return prices_.rows(); }
  std::size_t nodes() const noexcept { return tree_.size(); }
  const Matrix& prices() const noexcept { return prices_; }
  double price(std::size_t asset, NodeIndex n) const { return prices_(asset, n); }
  const std::string& asset_name(std::size_t asset) const { return names_.at(asset); }
  std::span<const std::string> asset_names() const noexcept { return names_; }

  /// S*[n] = (sum_i S[i][root])^-1 sum_i S[i][n].
  std::span<const double> numeraire() const noexcept { return numeraire_; }
  double initial_total() const noexcept { return initial_total_; }

  /// Price vector (S[0][n], ..., S[d-1][n]).
  std::vector<double> price_vector(NodeIndex n) const;

  /// Inner product theta . S(n).
  double value(std::span<const double> holdings, NodeIndex n) const;

  friend bool operator==(const MarketModel& a, const MarketModel& b) {
    return a.tree_ == b.tree_ && a.prices_ == b.prices_ && a.names_ == b.names_;
  }

 private:
  ScenarioTree tree_;
  Matrix prices_;
  std::vector<std::string> names_;
  std::vector<double> numeraire_;
  double initial_total_ = 0.0;
};

/// Node-indexed holdings; row n is the position held over the edges out of n.
class Strategy {
 public:
  Strategy() = default;
  Strategy(std::size_t nodes, std::size_t assets) : holdings_(nodes, assets) {}
  explicit Strategy(Matrix holdings) : holdings_(std::move(holdings)) {}

  std::size_t nodes() const noexcept { return holdings_.rows(); }
  std::size_t assets() const noexcept { return holdings_.cols(); }
  std::span<const double> at(NodeIndex n) const { return holdings_.row(n); }
  std::span<double> at(NodeIndex n) { return holdings_.row(n); }
  double& operator()(NodeIndex n, std::size_t asset) { return holdings_(n, asset); }
  double operator()(NodeIndex n, std::size_t asset) const { return holdings_(n, asset); }
  const Matrix& matrix() const noexcept { return holdings_; }

 private:
  Matrix holdings_;
};

/// Nonnegative payoff at each leaf, in leaf order.
class Claim {
 public:
  Claim() = default;
  explicit Claim(std::vector<double> payoff, std::string name = {});

  std::span<const double> payoff() const noexcept { return payoff_; }
  double operator[](std::size_t leaf_pos) const { return payoff_.at(leaf_pos); }
  std::size_t size() const noexcept { return payoff_.size(); }
  const std::string& name() const noexcept { return name_; }

  /// Payoff of asset `asset` at maturity.
  static Claim from_asset(const MarketModel& model, std::size_t asset);

 private:
  std::vector<double> payoff_;
  std::string name_;
};

/// Nodes where a strategy's holdings fail to be self-financing.
struct SelfFinancingGap {
  NodeIndex node;
  double gap;
};

struct WealthResult {
  std::vector<double> wealth;
  std::vector<SelfFinancingGap> violations;  // gaps above kSelfFinancingTolerance
  double max_gap = 0.0;

  bool self_financing() const noexcept { return violations.empty(); }
};

MarketModel build_market(ScenarioTree tree, Matrix prices, std::vector<std::string> asset_names = {});

/// W[root] = initial wealth, W[c] = theta(parent(c)).S(c). The root position
/// is checked against the initial wealth and every rebalancing against the
/// incoming wealth.
WealthResult wealth_process(const MarketModel& model, const Strategy& strategy, double initial_wealth);

/// Adds a scalar position theta*(n) in every asset so that theta* 1_d + partial
/// is self-financing with initial wealth x.
Strategy complete_strategy(const MarketModel& model, const Matrix& partial, double initial_wealth);

/// Scales prices node-wise by a strictly positive process y.
MarketModel deflate(const MarketModel& model, std::span<const double> y);

/// Checks that m is strictly positive, m[root] = 1 and every m S^i is a
/// one-step P-martingale. Returns the largest martingale residual, or throws
/// ModelError when positivity or normalisation fails.
double deflator_residual(const MarketModel& model, std::span<const double> m);

/// Conditional expectation backwards through the tree:
/// out[n] = sum_{leaves l below n} P(l|n) values[l].
std::vector<double> conditional_expectation(const ScenarioTree& tree, std::span<const double> leaf_values);

/// V[n] = M[n]^-1 E[M_T xi | n]; V at leaves equals the claim.
std::vector<double> fair_price_process(const MarketModel& model, std::span<const double> deflator,
                                       const Claim& claim);

/// E[values] under P for a leaf-ordered vector.
double expectation(const ScenarioTree& tree, std::span<const double> leaf_values);

}  // namespace fm
