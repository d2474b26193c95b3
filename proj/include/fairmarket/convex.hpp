#pragma once

// Smooth convex minimisation over a polytope {A x = b, x >= 0}.
//
// The driver is Frank-Wolfe with away steps: the linear minimisation oracle
// is solve_lp, and the Frank-Wolfe duality gap max_s g.(x - s) certifies the
// returned point. When the problem supplies a diagonal Hessian the driver
// also tries a damped Newton step restricted to the affine hull of the
// constraints, which converges quadratically for interior minimisers; the
// gap certificate is computed the same way in both modes.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fairmarket/matrix.hpp"

namespace fm {

using ScalarField = std::function<double(std::span<const double>)>;
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

struct ConvexProblem {
  ScalarField objective;
  VectorField gradient;
  VectorField hessian_diagonal;  // optional
  Matrix constraints;
  std::vector<double> rhs;
};

struct ConvexOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 100000;
};

struct ConvexResult {
  std::vector<double> minimizer;
  double value = 0.0;
  double gap = 0.0;  // Frank-Wolfe duality gap at the minimiser
  std::size_t iterations = 0;
  std::size_t newton_steps = 0;
  double smallest_coordinate = 0.0;  // over every accepted iterate
  bool converged = false;
};

/// Throws ModelError if `start` is infeasible and InternalError if the
/// objective or gradient is not finite at an accepted iterate.
ConvexResult minimize_convex(const ConvexProblem& problem, std::span<const double> start,
                             const ConvexOptions& options = {});

/// Orthonormal basis of the null space of `a` (columns), singular values
/// below 1e-10 of the largest treated as zero.
Matrix null_space(const Matrix& a);

}  // namespace fm
