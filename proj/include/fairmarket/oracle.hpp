#pragma once

// Brute-force reference computations, independent of the LP and convex
// engines. Exponential-time; every routine enforces the vertex-enumeration
// size guards and throws SizeGuardError past them.

#include <span>
#include <string>
#include <vector>

#include "fairmarket/convex.hpp"
#include "fairmarket/market.hpp"
#include "fairmarket/utility.hpp"

namespace fm {

struct OracleReport {
  std::string quantity;
  double oracle = 0.0;
  double engine = 0.0;
  double abs_diff = 0.0;
  double rel_diff = 0.0;  // abs_diff / max(1, |oracle|)
};

OracleReport compare(std::string quantity, double oracle, double engine);

using VertexList = std::vector<std::vector<double>>;

/// Vertices of the closed deflator polytope. The overloads below taking a
/// VertexList expect this output for the same model.
VertexList deflator_vertices(const MarketModel& model);

/// max over polytope vertices of E[M_T xi].
double oracle_superhedge(const MarketModel& model, const Claim& claim);
double oracle_superhedge(const MarketModel& model, const VertexList& vertices, const Claim& claim);

/// Grid search for min E[V(y M_T)] over the polytope, parametrised by an
/// orthonormal basis of its affine hull and boxed by the vertices, then one
/// refinement around the best cell. Polytope dimension must be at most 2
/// (density^dim evaluations per pass).
double oracle_dual(const MarketModel& model, const Utility& utility, double y, std::size_t density = 1000);
double oracle_dual(const MarketModel& model, const VertexList& vertices, const Utility& utility, double y,
                   std::size_t density = 1000);

/// True iff the polytope has exactly one vertex.
bool oracle_complete(const MarketModel& model);
bool oracle_complete(const VertexList& vertices);

/// True iff some point of the polytope is strictly positive, i.e. every
/// coordinate exceeds 1e-10 at some vertex (the vertex barycentre is then
/// such a point).
bool oracle_fair(const MarketModel& model);

/// Central differences with step h * max(1, |x_j|).
std::vector<double> finite_difference_gradient(const ScalarField& f, std::span<const double> x, double h = 1e-6);

}  // namespace fm
