#include "fairmarket/utility_dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairmarket/errors.hpp"
#include "fairmarket/superhedge.hpp"

namespace fm {

namespace {

void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || !(v > 0.0)) throw ModelError(std::string(what) + " must be finite and positive");
}

// sum_l P(l) M[l] I(y M[l]) - x, strictly decreasing in y.
double budget_gap(const MarketModel& model, const Utility& u, std::span<const double> m, double y, double x) {
  const auto& tree = model.tree();
  double s = 0.0;
  for (NodeIndex l : tree.leaves()) s += tree.path_prob(l) * m[l] * u.inverse_marginal(y * m[l]);
  return s - x;
}

// Root of the budget equation: bracket grown geometrically from [1, 1].
double solve_budget(const MarketModel& model, const Utility& u, std::span<const double> m, double x) {
  double lo = 1.0;
  double hi = 1.0;
  const double g1 = budget_gap(model, u, m, 1.0, x);
  if (g1 == 0.0) return 1.0;
  int doublings = 0;
  if (g1 > 0.0) {
    while (budget_gap(model, u, m, hi, x) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++doublings > 200) throw InternalError("budget bracket not found after 200 doublings");
    }
  } else {
    while (budget_gap(model, u, m, lo, x) < 0.0) {
      hi = lo;
      lo *= 0.5;
      if (++doublings > 200) throw InternalError("budget bracket not found after 200 halvings");
    }
  }
  for (int k = 0; k < 100; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (budget_gap(model, u, m, mid, x) > 0.0 ? lo : hi) = mid;
  }
  const double glo = std::fabs(budget_gap(model, u, m, lo, x));
  const double ghi = std::fabs(budget_gap(model, u, m, hi, x));
  return glo <= ghi ? lo : hi;
}

double expected_utility(const MarketModel& model, const Utility& u, std::span<const double> wealth) {
  const auto& tree = model.tree();
  double s = 0.0;
  for (NodeIndex l : tree.leaves()) s += tree.path_prob(l) * u.value(wealth[l]);
  return s;
}

double martingale_residual(const MarketModel& model, std::span<const double> m, std::span<const double> w) {
  const auto& tree = model.tree();
  double worst = 0.0;
  for (NodeIndex n : tree.interior()) {
    double s = -m[n] * w[n];
    for (NodeIndex c : tree.children(n)) s += tree.branch_prob(c) * m[c] * w[c];
    worst = std::max(worst, std::fabs(s));
  }
  return worst;
}

struct Candidate {
  double y = 0.0;
  std::vector<double> wealth;
  double budget_residual = 0.0;
};

Candidate candidate_wealth(const MarketModel& model, const Utility& u, const Deflator& m, double x) {
  const auto& tree = model.tree();
  Candidate c;
  c.y = solve_budget(model, u, m.values(), x);
  std::vector<double> terminal;
  terminal.reserve(tree.leaves().size());
  for (NodeIndex l : tree.leaves()) terminal.push_back(u.inverse_marginal(c.y * m[l]));
  c.wealth = fair_price_process(model, m.values(), Claim(std::move(terminal)));
  c.budget_residual = std::fabs(c.wealth[ScenarioTree::root()] - x);
  return c;
}

double max_of(std::span<const double> v) {
  double out = 0.0;
  for (double e : v) out = std::max(out, e);
  return out;
}

// The dual minimiser does not depend on y for log and power utilities:
// V(y m) is an affine (log) or positively scaled (power) function of V(m).
PrimalSolution primal_from_dual(const MarketModel& model, const Utility& u, const Deflator& m, double x) {
  Candidate c = candidate_wealth(model, u, m, x);
  DecompositionResult dec;
  try {
    dec = optional_decomposition(model, c.wealth, kConsumptionTolerance);
  } catch (const DecompositionError& e) {
    throw InternalError(std::string("optimal wealth is not replicable: ") + e.what());
  }
  const double consumption = max_of(dec.consumption);
  if (consumption > kConsumptionTolerance) {
    throw InternalError("replication of the optimal wealth leaves consumption " + std::to_string(consumption));
  }
  PrimalSolution p{x, c.y, m, std::move(c.wealth), std::move(dec.phi)};
  p.value = expected_utility(model, u, p.wealth);
  p.budget_residual = c.budget_residual;
  p.martingale_residual = martingale_residual(model, m.values(), p.wealth);
  p.max_consumption = consumption;
  return p;
}

}  // namespace

ConvexProblem dual_problem(const MarketModel& model, const Utility& utility, double y) {
  require_positive(y, "dual variable y");
  const auto& tree = model.tree();
  std::vector<NodeIndex> leaves(tree.leaves().begin(), tree.leaves().end());
  std::vector<double> probs;
  for (NodeIndex l : leaves) probs.push_back(tree.path_prob(l));

  ConvexProblem p;
  p.objective = [=](std::span<const double> m) {
    double s = 0.0;
    for (std::size_t k = 0; k < leaves.size(); ++k) s += probs[k] * utility.conjugate(y * m[leaves[k]]);
    return s;
  };
  p.gradient = [=](std::span<const double> m, std::span<double> g) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      const double mk = m[leaves[k]];
      g[leaves[k]] = mk > 0.0 ? probs[k] * y * utility.conjugate_slope(y * mk)
                              : -std::numeric_limits<double>::infinity();
    }
  };
  p.hessian_diagonal = [=](std::span<const double> m, std::span<double> h) {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      h[leaves[k]] = probs[k] * y * y * utility.conjugate_curvature(y * m[leaves[k]]);
    }
  };
  const DeflatorPolytope poly = build_polytope(model);
  p.constraints = poly.constraints;
  p.rhs = poly.rhs;
  return p;
}

DualSolution solve_dual(const MarketModel& model, const Utility& utility, double y) {
  require_positive(y, "dual variable y");
  const FairnessReport fairness = check_fair(model);
  const Deflator& witness = require_fair(fairness);
  const ConvexResult r = minimize_convex(dual_problem(model, utility, y), witness.values());
  if (!r.converged) {
    throw InternalError("dual problem stopped with Frank-Wolfe gap " + std::to_string(r.gap));
  }
  if (!(r.smallest_coordinate > 0.0)) throw InternalError("dual iterate left the interior of the polytope");
  return DualSolution{y, Deflator(model, r.minimizer), r.value, r.gap, r.iterations};
}

PrimalSolution solve_primal(const MarketModel& model, const Utility& utility, double x) {
  require_positive(x, "initial wealth");
  const DualSolution d = solve_dual(model, utility, 1.0);
  return primal_from_dual(model, utility, d.deflator, x);
}

ValueTables value_functions(const MarketModel& model, const Utility& utility, std::span<const double> xs,
                            std::span<const double> ys) {
  ValueTables t;
  t.xs.assign(xs.begin(), xs.end());
  t.ys.assign(ys.begin(), ys.end());
  if (xs.empty() || ys.empty()) return t;
  const DualSolution base = solve_dual(model, utility, 1.0);
  for (double x : xs) {
    require_positive(x, "grid wealth");
    t.u.push_back(primal_from_dual(model, utility, base.deflator, x).value);
  }
  for (double y : ys) t.v.push_back(solve_dual(model, utility, y).value);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ys.size(); ++j) best = std::min(best, t.v[j] + xs[i] * ys[j]);
    t.u_residual.push_back(std::fabs(t.u[i] - best));
  }
  for (std::size_t j = 0; j < ys.size(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) best = std::max(best, t.u[i] - xs[i] * ys[j]);
    t.v_residual.push_back(std::fabs(t.v[j] - best));
  }
  return t;
}

MinimaxCheck verify_minimax(const MarketModel& model, const Utility& utility, const Deflator& candidate, double x) {
  require_positive(x, "initial wealth");
  MinimaxCheck out;
  Candidate c = candidate_wealth(model, utility, candidate, x);
  out.y = c.y;
  out.budget_residual = c.budget_residual;
  out.wealth = c.wealth;
  if (c.budget_residual > kBudgetTolerance) {
    out.reason = "budget equation residual " + std::to_string(c.budget_residual);
    return out;
  }
  try {
    const DecompositionResult dec = optional_decomposition(model, c.wealth, kConsumptionTolerance);
    out.max_consumption = max_of(dec.consumption);
  } catch (const DecompositionError& e) {
    out.reason = e.what();
    return out;
  }
  if (out.max_consumption > kConsumptionTolerance) {
    out.reason = "candidate wealth requires consumption " + std::to_string(out.max_consumption);
    return out;
  }
  out.minimax = true;
  const double u_star = expected_utility(model, utility, c.wealth);
  out.utility_gap = std::fabs(u_star - solve_primal(model, utility, x).value);
  return out;
}

DavisPrice davis_price(const MarketModel& model, const Utility& utility, double x, const Claim& claim) {
  const auto& tree = model.tree();
  if (claim.size() != tree.leaves().size()) throw ModelError("claim length does not match the leaf count");
  const PrimalSolution p = solve_primal(model, utility, x);
  DavisPrice out;
  double marginal = 0.0;
  for (NodeIndex l : tree.leaves()) {
    const double xi = claim[tree.leaf_position(l)];
    marginal += tree.path_prob(l) * utility.marginal(p.wealth[l]) * xi;
    out.deflator_price += tree.path_prob(l) * p.deflator[l] * xi;
  }
  out.price = marginal / p.y;
  out.residual = std::fabs(out.price - out.deflator_price);
  return out;
}

Augmentation augment_market(const MarketModel& model, const Utility& utility, double x, const Claim& claim) {
  const PrimalSolution before = solve_primal(model, utility, x);
  std::vector<double> process = fair_price_process(model, before.deflator.values(), claim);

  Matrix prices = model.prices();
  prices.append_row(process);
  std::vector<std::string> names(model.asset_names().begin(), model.asset_names().end());
  names.push_back(claim.name().empty() ? "claim" : claim.name());
  MarketModel market = build_market(model.tree(), std::move(prices), std::move(names));

  AugmentationDiagnostics diag;
  diag.fair = check_fair(market).fair;
  diag.deflator_residual = deflator_residual(market, before.deflator.values());
  diag.complete_before = check_complete(model).complete;
  diag.u_before = before.value;
  const DualSolution v0 = solve_dual(model, utility, before.y);
  diag.v_before = v0.value;
  if (diag.fair) {
    diag.complete_after = check_complete(market).complete;
    const DualSolution v1 = solve_dual(market, utility, before.y);
    diag.v_after = v1.value;
    for (NodeIndex n = 0; n < model.nodes(); ++n) {
      diag.max_deflator_change = std::max(diag.max_deflator_change, std::fabs(v1.deflator[n] - v0.deflator[n]));
    }
    diag.u_after = solve_primal(market, utility, x).value;
  }
  const double price = process[ScenarioTree::root()];
  return Augmentation{std::move(market), std::move(process), price, diag};
}

PrimalSolution growth_optimal(const MarketModel& model, double x) {
  PrimalSolution p = solve_primal(model, Utility::log(), x);
  for (NodeIndex n = 0; n < model.nodes(); ++n) {
    const double r = std::fabs(p.deflator[n] * p.wealth[n] - x);
    if (r > kBudgetTolerance * std::max(1.0, x)) {
      throw InternalError("growth-optimal wealth is not the reciprocal of the deflator at node '" +
                          model.tree().id(n) + "'");
    }
  }
  return p;
}

}  // namespace fm
