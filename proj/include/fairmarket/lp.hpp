#pragma once

// Dense two-phase primal simplex for small linear programs
//
//     max / min  c.x   subject to  A x = b,  x >= lower
//
// The entering column follows Bland's lowest-index rule. The leaving row
// comes from a Harris two-pass ratio test that prefers the largest pivot
// among near-tied rows (lowest basis index on exact ties), which keeps
// degenerate problems numerically stable; a pivot guard backs up the
// termination argument. Results are deterministic for a given ordering.

#include <cstddef>
#include <string_view>
#include <vector>

#include "fairmarket/matrix.hpp"

namespace fm {

enum class Sense { minimize, maximize };
enum class LPStatus { optimal, infeasible, unbounded };

std::string_view to_string(LPStatus status) noexcept;

struct LinearProgram {
  std::vector<double> objective;  // c
  Matrix constraints;             // A, one row per equality
  std::vector<double> rhs;        // b
  std::vector<double> lower;      // empty means all zero
  Sense sense = Sense::maximize;

  std::size_t variables() const noexcept { return objective.size(); }
  std::size_t equalities() const noexcept { return rhs.size(); }
};

struct LPSolution {
  LPStatus status = LPStatus::infeasible;
  std::vector<double> x;
  /// Multipliers y with c - A^T y >= 0 (minimise) / <= 0 (maximise) at optimality.
  std::vector<double> duals;
  /// c - A^T y.
  std::vector<double> reduced_costs;
  double value = 0.0;
  std::size_t pivots = 0;

  bool optimal() const noexcept { return status == LPStatus::optimal; }
};

struct LPOptions {
  double pivot_tolerance = 1e-11;
  double optimality_tolerance = 1e-11;
  double feasibility_tolerance = 1e-9;
  std::size_t max_pivots = 200000;
};

/// Throws ModelError on inconsistent dimensions and InternalError if the
/// pivot guard trips.
LPSolution solve_lp(const LinearProgram& lp, const LPOptions& options = {});

/// KKT residuals of an optimal solution, for certification and tests.
struct KKTResiduals {
  double primal = 0.0;         // max |A x - b|, max (lower - x)+
  double dual = 0.0;           // worst sign violation of the reduced costs
  double complementarity = 0.0;  // max |r_j (x_j - lower_j)|
  double gap = 0.0;            // |c.x - (b.y + r.lower)|
};

KKTResiduals kkt_residuals(const LinearProgram& lp, const LPSolution& solution);

struct VertexOptions {
  std::size_t max_variables = 25;
  std::size_t max_bases = 5'000'000;
  double tolerance = 1e-9;
};

/// All vertices of {A x = b, x >= 0} by exhaustive basis enumeration,
/// deduplicated within `tolerance` (sup norm). Independent of solve_lp; used
/// as a test oracle. Throws SizeGuardError past the guards.
std::vector<std::vector<double>> enumerate_vertices(const Matrix& a, const std::vector<double>& b,
                                                    const VertexOptions& options = {});

}  // namespace fm
