#include "fairmarket/superhedge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairmarket/errors.hpp"

namespace fm {

std::string_view to_string(Attainability a) noexcept {
  switch (a) {
    case Attainability::strongly_regular:
      return "strongly-regular";
    case Attainability::regular_attainable:
      return "regular-attainable";
    case Attainability::not_attainable:
      return "not-attainable";
  }
  return "unknown";
}

namespace {

std::vector<double> claim_objective(const MarketModel& model, const Claim& claim) {
  const auto& tree = model.tree();
  if (claim.size() != tree.leaves().size()) throw ModelError("claim length does not match the leaf count");
  std::vector<double> c(model.nodes(), 0.0);
  for (std::size_t k = 0; k < claim.size(); ++k) {
    const NodeIndex l = tree.leaves()[k];
    c[l] = tree.path_prob(l) * claim[k];
  }
  return c;
}

double relative_scale(double v) { return std::max(1.0, std::fabs(v)); }

PriceInterval price_bounds(const MarketModel& model, const Claim& claim) {
  const DeflatorPolytope poly = build_polytope(model);
  LinearProgram lp;
  lp.objective = claim_objective(model, claim);
  lp.constraints = poly.constraints;
  lp.rhs = poly.rhs;

  PriceInterval out;
  lp.sense = Sense::maximize;
  LPSolution hi = solve_lp(lp);
  lp.sense = Sense::minimize;
  LPSolution lo = solve_lp(lp);
  if (!hi.optimal() || !lo.optimal()) throw InternalError("superhedging LP failed on a fair market");
  out.upper = hi.value;
  out.lower = lo.value;
  out.upper_deflator = std::move(hi.x);
  out.lower_deflator = std::move(lo.x);
  return out;
}

}  // namespace

PriceInterval superhedge_price(const MarketModel& model, const Claim& claim) {
  require_fair(check_fair(model));
  return price_bounds(model, claim);
}

LocalSuperhedge local_superhedge(const MarketModel& model, NodeIndex node, std::span<const double> process) {
  const auto kids = model.tree().children(node);
  std::vector<double> child_values;
  child_values.reserve(kids.size());
  for (NodeIndex c : kids) child_values.push_back(process[c]);
  const LPSolution s = solve_lp(local_program(model, node, child_values, Sense::maximize));
  if (s.status == LPStatus::infeasible) {
    throw UnfairMarketError("no one-step deflator exists at node '" + model.tree().id(node) + "'");
  }
  if (!s.optimal()) throw InternalError("local superhedging LP is unbounded at node '" + model.tree().id(node) + "'");
  return {s.value, s.x, s.duals};
}

std::vector<double> superhedge_process(const MarketModel& model, const Claim& claim) {
  require_fair(check_fair(model));
  const auto& tree = model.tree();
  if (claim.size() != tree.leaves().size()) throw ModelError("claim length does not match the leaf count");
  std::vector<double> u(tree.size(), 0.0);
  for (std::size_t k = 0; k < claim.size(); ++k) u[tree.leaves()[k]] = claim[k];
  for (auto it = tree.interior().rbegin(); it != tree.interior().rend(); ++it) {
    u[*it] = local_superhedge(model, *it, u).value;
  }
  return u;
}

DecompositionResult optional_decomposition(const MarketModel& model, std::span<const double> process,
                                           double tolerance) {
  const auto& tree = model.tree();
  if (process.size() != tree.size()) throw ModelError("process length does not match the tree");
  DecompositionResult out;
  out.value.assign(process.begin(), process.end());
  out.phi = Strategy(tree.size(), model.assets());
  out.consumption.assign(tree.size(), 0.0);
  out.hedge_value.assign(tree.size(), 0.0);
  out.hedge_value[ScenarioTree::root()] = process[ScenarioTree::root()];

  for (NodeIndex n : tree.interior()) {
    LocalSuperhedge loc = local_superhedge(model, n, process);
    const double excess = loc.value - process[n];
    if (excess > tolerance * relative_scale(process[n])) {
      std::ostringstream os;
      os.precision(17);
      os << "process is not a supermartingale under every deflator at node '" << tree.id(n)
         << "': a closure deflator raises the one-step expectation by " << excess;
      throw DecompositionError(n, std::move(loc.ratios), excess, os.str());
    }
    for (std::size_t i = 0; i < model.assets(); ++i) out.phi(n, i) = loc.hedge[i];
    const double cost = model.value(out.phi.at(n), n);
    for (NodeIndex c : tree.children(n)) {
      const double carried = model.value(out.phi.at(n), c);
      out.hedge_value[c] = carried;
      out.consumption[c] = out.consumption[n] + (process[n] - cost) + (carried - process[c]);
    }
  }
  return out;
}

AttainabilityVerdict classify_attainability(const MarketModel& model, const Claim& claim) {
  const FairnessReport fair = check_fair(model);
  const Deflator& witness = require_fair(fair);
  AttainabilityVerdict v;
  v.interval = price_bounds(model, claim);
  if (v.interval.width() <= kIntervalTolerance * relative_scale(v.interval.upper)) {
    v.kind = Attainability::strongly_regular;
    v.deflator.assign(witness.values().begin(), witness.values().end());
    v.face_radius = *fair.interior_radius;
    return v;
  }

  // max eps over the optimal face {M in closure : E[M_T xi] = upper}.
  const DeflatorPolytope poly = build_polytope(model);
  const std::size_t n = model.nodes();
  const std::size_t rows = poly.constraints.rows();
  const std::vector<double> c = claim_objective(model, claim);
  LinearProgram lp;
  lp.sense = Sense::maximize;
  lp.objective.assign(2 * n + 1, 0.0);
  lp.objective[n] = 1.0;
  lp.constraints = Matrix(rows + 1 + n, 2 * n + 1);
  lp.rhs.assign(rows + 1 + n, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) lp.constraints(r, j) = poly.constraints(r, j);
    lp.rhs[r] = poly.rhs[r];
  }
  for (std::size_t j = 0; j < n; ++j) lp.constraints(rows, j) = c[j];
  lp.rhs[rows] = v.interval.upper;
  for (std::size_t k = 0; k < n; ++k) {
    lp.constraints(rows + 1 + k, k) = 1.0;
    lp.constraints(rows + 1 + k, n) = -1.0;
    lp.constraints(rows + 1 + k, n + 1 + k) = -1.0;
  }
  const LPSolution face = solve_lp(lp);
  if (face.optimal()) v.face_radius = face.x[n];
  if (face.optimal() && face.x[n] > kPositivityThreshold) {
    v.kind = Attainability::regular_attainable;
    v.deflator.assign(face.x.begin(), face.x.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    v.kind = Attainability::not_attainable;
    v.deflator = v.interval.upper_deflator;
  }
  return v;
}

bool completeness_via_claims(const MarketModel& model) {
  require_fair(check_fair(model));
  const auto& tree = model.tree();
  const std::size_t leaves = tree.leaves().size();
  for (std::size_t k = 0; k < leaves; ++k) {
    std::vector<double> payoff(leaves, 0.0);
    payoff[k] = model.numeraire()[tree.leaves()[k]];
    const PriceInterval iv = price_bounds(model, Claim(std::move(payoff)));
    if (iv.width() > kIntervalTolerance * relative_scale(iv.upper)) return false;
  }
  return true;
}

}  // namespace fm
