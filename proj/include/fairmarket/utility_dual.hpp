#pragma once

// Expected-utility maximisation by convex duality.
//
//   primal  u(x) = sup { E U(X_T) : X admissible, X_0 = x }
//   dual    v(y) = inf { E V(y M_T) : M a martingale deflator }
//
// The dual is a smooth convex programme over the deflator polytope; its
// minimiser M^ (the minimax deflator) gives the optimal terminal wealth
// X^_T = I(y^ M^_T), with y^ fixed by the budget E[M^_T X^_T] = x.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairmarket/convex.hpp"
#include "fairmarket/deflator.hpp"
#include "fairmarket/market.hpp"
#include "fairmarket/utility.hpp"

namespace fm {

inline constexpr double kBudgetTolerance = 1e-8;
inline constexpr double kConsumptionTolerance = 1e-7;

struct DualSolution {
  double y = 0.0;
  Deflator deflator;
  double value = 0.0;  // v(y)
  double gap = 0.0;    // Frank-Wolfe certificate
  std::size_t iterations = 0;
};

struct PrimalSolution {
  double x = 0.0;
  double y = 0.0;  // y^ = u'(x)
  Deflator deflator;
  std::vector<double> wealth;  // node-indexed
  Strategy strategy;
  double value = 0.0;  // u(x)
  double budget_residual = 0.0;
  double martingale_residual = 0.0;  // max one-step residual of M^ X^
  double max_consumption = 0.0;
};

struct ValueTables {
  std::vector<double> xs, ys;
  std::vector<double> u, v;
  std::vector<double> u_residual;  // |u(x) - min_y (v(y) + x y)|
  std::vector<double> v_residual;  // |v(y) - max_x (u(x) - x y)|
};

struct MinimaxCheck {
  bool minimax = false;
  std::optional<double> y;
  std::vector<double> wealth;  // X*, node-indexed, when a y was found
  double budget_residual = 0.0;
  double max_consumption = 0.0;
  std::optional<double> utility_gap;  // |u* - u(x)| when minimax
  std::string reason;
};

struct DavisPrice {
  double price = 0.0;           // E[U'(X^_T) xi] / y^
  double deflator_price = 0.0;  // E[M^_T xi]
  double residual = 0.0;
};

struct AugmentationDiagnostics {
  bool fair = false;
  double deflator_residual = 0.0;  // of the original M^ on the augmented market
  double v_before = 0.0, v_after = 0.0;
  double u_before = 0.0, u_after = 0.0;
  double max_deflator_change = 0.0;
  bool complete_before = false, complete_after = false;
};

struct Augmentation {
  MarketModel market;
  std::vector<double> price_process;
  double price = 0.0;
  AugmentationDiagnostics diagnostics;
};

/// The dual objective sum_l P(l) V(y M_l) over node-indexed M, with its
/// gradient and diagonal Hessian, posed on the deflator polytope.
ConvexProblem dual_problem(const MarketModel& model, const Utility& utility, double y);

DualSolution solve_dual(const MarketModel& model, const Utility& utility, double y);

PrimalSolution solve_primal(const MarketModel& model, const Utility& utility, double x);

ValueTables value_functions(const MarketModel& model, const Utility& utility, std::span<const double> xs,
                            std::span<const double> ys);

MinimaxCheck verify_minimax(const MarketModel& model, const Utility& utility, const Deflator& candidate, double x);

DavisPrice davis_price(const MarketModel& model, const Utility& utility, double x, const Claim& claim);

/// Appends the claim, priced under M^, as a new asset.
Augmentation augment_market(const MarketModel& model, const Utility& utility, double x, const Claim& claim);

/// Log-utility optimum; throws InternalError unless M^ X^ = x nodewise within 1e-8.
PrimalSolution growth_optimal(const MarketModel& model, double x);

}  // namespace fm
