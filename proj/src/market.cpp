#include "fairmarket/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "fairmarket/errors.hpp"
#include "fairmarket/kernels.hpp"

namespace fm {

namespace {

constexpr double kDeflatorTolerance = 1e-9;

[[noreturn]] void model_error(const std::string& what) { throw ModelError(what); }

}  // namespace

ScenarioTree ScenarioTree::create(std::span<const NodeSpec> nodes) {
  if (nodes.empty()) model_error("scenario tree has no nodes");
  ScenarioTree t;
  std::unordered_map<std::string, NodeIndex> index;
  const std::size_t n = nodes.size();
  t.ids_.reserve(n);
  t.parents_.reserve(n);
  t.times_.reserve(n);
  t.children_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const NodeSpec& spec = nodes[k];
    if (spec.id.empty()) model_error("node " + std::to_string(k) + " has an empty id");
    if (!index.emplace(spec.id, k).second) model_error("duplicate node id '" + spec.id + "'");
    if (!std::isfinite(spec.prob)) model_error("node '" + spec.id + "': probability is not finite");
    if (k == 0) {
      if (spec.parent) model_error("first node '" + spec.id + "' must be the root (no parent)");
      if (spec.prob != 1.0) model_error("root '" + spec.id + "' must have branch probability 1");
      t.parents_.push_back(-1);
      t.times_.push_back(0);
    } else {
      if (!spec.parent) model_error("node '" + spec.id + "' has no parent; only one root is allowed");
      const auto it = index.find(*spec.parent);
      if (it == index.end() || it->second == k) {
        model_error("node '" + spec.id + "': parent '" + *spec.parent + "' must appear earlier");
      }
      if (!(spec.prob > 0.0) || spec.prob > 1.0) {
        model_error("node '" + spec.id + "': branch probability must lie in (0,1]");
      }
      t.parents_.push_back(static_cast<std::ptrdiff_t>(it->second));
      t.times_.push_back(t.times_[it->second] + 1);
      t.children_[it->second].push_back(k);
    }
    t.ids_.push_back(spec.id);
    t.branch_probs_.push_back(spec.prob);
  }

  t.path_probs_.assign(n, 1.0);
  t.leaf_pos_.assign(n, static_cast<std::size_t>(-1));
  t.horizon_ = -1;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) t.path_probs_[k] = t.path_probs_[static_cast<std::size_t>(t.parents_[k])] * t.branch_probs_[k];
    if (t.children_[k].empty()) {
      if (t.horizon_ < 0) t.horizon_ = t.times_[k];
      if (t.times_[k] != t.horizon_) {
        model_error("leaf '" + t.ids_[k] + "' is at time " + std::to_string(t.times_[k]) +
                    " but the horizon is " + std::to_string(t.horizon_) + " (pad shorter paths)");
      }
      t.leaf_pos_[k] = t.leaves_.size();
      t.leaves_.push_back(k);
    } else {
      double sum = 0.0;
      for (NodeIndex c : t.children_[k]) sum += t.branch_probs_[c];
      if (std::fabs(sum - 1.0) > kProbabilitySumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "children of node '" << t.ids_[k] << "' have probabilities summing to " << sum;
        model_error(os.str());
      }
      t.interior_.push_back(k);
    }
  }
  return t;
}

std::optional<NodeIndex> ScenarioTree::find(const std::string& id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<NodeIndex>(it - ids_.begin());
}

std::optional<NodeIndex> ScenarioTree::parent(NodeIndex n) const {
  const auto p = parents_.at(n);
  if (p < 0) return std::nullopt;
  return static_cast<NodeIndex>(p);
}

std::vector<NodeIndex> ScenarioTree::leaves_below(NodeIndex n) const {
  std::vector<NodeIndex> out;
  std::vector<NodeIndex> stack{n};
  while (!stack.empty()) {
    const NodeIndex k = stack.back();
    stack.pop_back();
    if (is_leaf(k)) {
      out.push_back(k);
    } else {
      for (auto it = children_[k].rbegin(); it != children_[k].rend(); ++it) stack.push_back(*it);
    }
  }
  return out;
}

std::vector<NodeSpec> ScenarioTree::specs() const {
  std::vector<NodeSpec> out;
  out.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) {
    NodeSpec s{ids_[k], std::nullopt, branch_probs_[k]};
    if (parents_[k] >= 0) s.parent = ids_[static_cast<std::size_t>(parents_[k])];
    out.push_back(std::move(s));
  }
  return out;
}

MarketModel MarketModel::create(ScenarioTree tree, Matrix prices, std::vector<std::string> asset_names) {
  const std::size_t d = prices.rows();
  if (d == 0) model_error("market needs at least one asset");
  if (prices.cols() != tree.size()) {
    model_error("price matrix has " + std::to_string(prices.cols()) + " columns but the tree has " +
                std::to_string(tree.size()) + " nodes");
  }
  if (asset_names.empty()) {
    for (std::size_t i = 0; i < d; ++i) asset_names.push_back("asset" + std::to_string(i));
  }
  if (asset_names.size() != d) model_error("asset name count does not match the price matrix");

  for (std::size_t i = 0; i < d; ++i) {
    for (NodeIndex n = 0; n < tree.size(); ++n) {
      const double s = prices(i, n);
      if (!std::isfinite(s) || s < 0.0) {
        model_error("asset '" + asset_names[i] + "' has a negative or non-finite price at node '" +
                    tree.id(n) + "'");
      }
      if (s == 0.0) {
        if (n == ScenarioTree::root()) {
          model_error("asset '" + asset_names[i] + "' has zero initial price");
        }
        for (NodeIndex c : tree.children(n)) {
          if (prices(i, c) != 0.0) {
            model_error("asset '" + asset_names[i] + "' is zero at node '" + tree.id(n) +
                        "' but positive at its child '" + tree.id(c) + "' (absorbing zero violated)");
          }
        }
      }
    }
  }

  MarketModel m;
  m.numeraire_.assign(tree.size(), 0.0);
  for (std::size_t i = 0; i < d; ++i) m.initial_total_ += prices(i, ScenarioTree::root());
  for (NodeIndex n = 0; n < tree.size(); ++n) {
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) total += prices(i, n);
    if (!(total > 0.0)) model_error("aggregate price is zero at node '" + tree.id(n) + "'");
    m.numeraire_[n] = total / m.initial_total_;
  }
  m.tree_ = std::move(tree);
  m.prices_ = std::move(prices);
  m.names_ = std::move(asset_names);
  return m;
}

std::vector<double> MarketModel::price_vector(NodeIndex n) const {
  std::vector<double> out(assets());
  for (std::size_t i = 0; i < assets(); ++i) out[i] = prices_(i, n);
  return out;
}

double MarketModel::value(std::span<const double> holdings, NodeIndex n) const {
  double v = 0.0;
  for (std::size_t i = 0; i < assets(); ++i) v += holdings[i] * prices_(i, n);
  return v;
}

Claim::Claim(std::vector<double> payoff, std::string name) : payoff_(std::move(payoff)), name_(std::move(name)) {
  for (std::size_t k = 0; k < payoff_.size(); ++k) {
    if (!std::isfinite(payoff_[k]) || payoff_[k] < 0.0) {
      throw ModelError("claim '" + name_ + "' has a negative or non-finite payoff at leaf position " +
                       std::to_string(k));
    }
  }
}

Claim Claim::from_asset(const MarketModel& model, std::size_t asset) {
  std::vector<double> payoff;
  for (NodeIndex l : model.tree().leaves()) payoff.push_back(model.price(asset, l));
  return Claim(std::move(payoff), model.asset_name(asset));
}

MarketModel build_market(ScenarioTree tree, Matrix prices, std::vector<std::string> asset_names) {
  return MarketModel::create(std::move(tree), std::move(prices), std::move(asset_names));
}

WealthResult wealth_process(const MarketModel& model, const Strategy& strategy, double initial_wealth) {
  const auto& tree = model.tree();
  if (strategy.nodes() != tree.size() || strategy.assets() != model.assets()) {
    throw ModelError("strategy dimensions do not match the market");
  }
  WealthResult r;
  r.wealth.assign(tree.size(), 0.0);
  r.wealth[ScenarioTree::root()] = initial_wealth;
  auto record = [&r](NodeIndex n, double gap) {
    r.max_gap = std::max(r.max_gap, gap);
    if (gap > kSelfFinancingTolerance) r.violations.push_back({n, gap});
  };
  if (!tree.is_leaf(ScenarioTree::root())) {
    record(ScenarioTree::root(),
           std::fabs(model.value(strategy.at(ScenarioTree::root()), ScenarioTree::root()) - initial_wealth));
  }
  for (NodeIndex n = 1; n < tree.size(); ++n) {
    const NodeIndex p = *tree.parent(n);
    r.wealth[n] = model.value(strategy.at(p), n);
    if (!tree.is_leaf(n)) record(n, std::fabs(model.value(strategy.at(n), n) - r.wealth[n]));
  }
  return r;
}

Strategy complete_strategy(const MarketModel& model, const Matrix& partial, double initial_wealth) {
  const auto& tree = model.tree();
  if (partial.rows() != tree.size() || partial.cols() != model.assets()) {
    throw ModelError("partial holdings dimensions do not match the market");
  }
  Strategy out(partial);
  std::vector<double> incoming(tree.size(), 0.0);
  incoming[ScenarioTree::root()] = initial_wealth;
  for (NodeIndex n = 0; n < tree.size(); ++n) {
    if (tree.is_leaf(n)) continue;
    if (n != ScenarioTree::root()) incoming[n] = model.value(out.at(*tree.parent(n)), n);
    const double total = model.numeraire()[n] * model.initial_total();
    const double shift = (incoming[n] - model.value(partial.row(n), n)) / total;
    for (std::size_t i = 0; i < model.assets(); ++i) out(n, i) = partial(n, i) + shift;
  }
  return out;
}

MarketModel deflate(const MarketModel& model, std::span<const double> y) {
  if (y.size() != model.nodes()) throw ModelError("numeraire length does not match the tree");
  Matrix scaled = model.prices();
  for (NodeIndex n = 0; n < model.nodes(); ++n) {
    if (!std::isfinite(y[n]) || !(y[n] > 0.0)) {
      throw ModelError("numeraire is not strictly positive at node '" + model.tree().id(n) + "'");
    }
    for (std::size_t i = 0; i < model.assets(); ++i) scaled(i, n) *= y[n];
  }
  std::vector<std::string> names(model.asset_names().begin(), model.asset_names().end());
  return MarketModel::create(model.tree(), std::move(scaled), std::move(names));
}

double deflator_residual(const MarketModel& model, std::span<const double> m) {
  const auto& tree = model.tree();
  if (m.size() != tree.size()) throw ModelError("deflator length does not match the tree");
  if (std::fabs(m[ScenarioTree::root()] - 1.0) > kDeflatorTolerance) {
    throw ModelError("deflator is not normalised to 1 at the root");
  }
  for (NodeIndex n = 0; n < tree.size(); ++n) {
    if (!std::isfinite(m[n]) || !(m[n] > 0.0)) {
      throw ModelError("deflator is not strictly positive at node '" + tree.id(n) + "'");
    }
  }
  double worst = 0.0;
  for (NodeIndex n : tree.interior()) {
    for (std::size_t i = 0; i < model.assets(); ++i) {
      double next = 0.0;
      for (NodeIndex c : tree.children(n)) next += tree.branch_prob(c) * m[c] * model.price(i, c);
      worst = std::max(worst, std::fabs(next - m[n] * model.price(i, n)));
    }
  }
  return worst;
}

std::vector<double> conditional_expectation(const ScenarioTree& tree, std::span<const double> leaf_values) {
  if (leaf_values.size() != tree.leaves().size()) throw ModelError("leaf vector length does not match the tree");
  std::vector<double> out(tree.size(), 0.0);
  for (std::size_t k = 0; k < leaf_values.size(); ++k) out[tree.leaves()[k]] = leaf_values[k];
  for (auto it = tree.interior().rbegin(); it != tree.interior().rend(); ++it) {
    double s = 0.0;
    for (NodeIndex c : tree.children(*it)) s += tree.branch_prob(c) * out[c];
    out[*it] = s;
  }
  return out;
}

double expectation(const ScenarioTree& tree, std::span<const double> leaf_values) {
  if (leaf_values.size() != tree.leaves().size()) throw ModelError("leaf vector length does not match the tree");
  std::vector<double> probs;
  probs.reserve(leaf_values.size());
  for (NodeIndex l : tree.leaves()) probs.push_back(tree.path_prob(l));
  return kernels::dot(probs, leaf_values);
}

std::vector<double> fair_price_process(const MarketModel& model, std::span<const double> deflator,
                                       const Claim& claim) {
  const auto& tree = model.tree();
  if (claim.size() != tree.leaves().size()) throw ModelError("claim length does not match the leaf count");
  if (deflator_residual(model, deflator) > kDeflatorTolerance) {
    throw ModelError("process is not a martingale deflator for this market");
  }
  std::vector<double> weighted(claim.size());
  for (std::size_t k = 0; k < claim.size(); ++k) weighted[k] = deflator[tree.leaves()[k]] * claim[k];
  std::vector<double> v = conditional_expectation(tree, weighted);
  for (NodeIndex n = 0; n < tree.size(); ++n) {
    v[n] = tree.is_leaf(n) ? claim[tree.leaf_position(n)] : v[n] / deflator[n];
  }
  return v;
}

}  // namespace fm
