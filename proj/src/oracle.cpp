#include "fairmarket/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairmarket/deflator.hpp"
#include "fairmarket/errors.hpp"
#include "fairmarket/lp.hpp"

namespace fm {

namespace {

constexpr std::size_t kMaxGridDimension = 2;

struct Grid {
  std::vector<double> lo, hi;
};

// Visits every point of a density^dim grid over the box, calling f(t).
template <class F>
void sweep(const Grid& box, std::size_t density, F&& f) {
  const std::size_t dim = box.lo.size();
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> t(dim);
  while (true) {
    for (std::size_t a = 0; a < dim; ++a) {
      const double w = density > 1 ? static_cast<double>(idx[a]) / static_cast<double>(density - 1) : 0.5;
      t[a] = box.lo[a] + w * (box.hi[a] - box.lo[a]);
    }
    f(t);
    std::size_t a = 0;
    while (a < dim && ++idx[a] == density) idx[a++] = 0;
    if (a == dim) return;
  }
}

}  // namespace

OracleReport compare(std::string quantity, double oracle, double engine) {
  const double diff = std::fabs(oracle - engine);
  return {std::move(quantity), oracle, engine, diff, diff / std::max(1.0, std::fabs(oracle))};
}

VertexList deflator_vertices(const MarketModel& model) {
  const DeflatorPolytope poly = build_polytope(model);
  return enumerate_vertices(poly.constraints, poly.rhs);
}

double oracle_superhedge(const MarketModel& model, const Claim& claim) {
  return oracle_superhedge(model, deflator_vertices(model), claim);
}

double oracle_superhedge(const MarketModel& model, const VertexList& vertices, const Claim& claim) {
  const auto& tree = model.tree();
  if (claim.size() != tree.leaves().size()) throw ModelError("claim length does not match the leaf count");
  if (vertices.empty()) throw UnfairMarketError("deflator polytope is empty");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) {
    double s = 0.0;
    for (std::size_t k = 0; k < claim.size(); ++k) s += tree.path_prob(tree.leaves()[k]) * v[tree.leaves()[k]] * claim[k];
    best = std::max(best, s);
  }
  return best;
}

double oracle_dual(const MarketModel& model, const Utility& utility, double y, std::size_t density) {
  return oracle_dual(model, deflator_vertices(model), utility, y, density);
}

double oracle_dual(const MarketModel& model, const VertexList& vertices, const Utility& utility, double y,
                   std::size_t density) {
  if (!(y > 0.0)) throw ModelError("dual variable y must be positive");
  if (density < 2) throw ModelError("grid density must be at least 2");
  const auto& tree = model.tree();
  if (vertices.empty()) throw UnfairMarketError("deflator polytope is empty");

  auto value = [&](std::span<const double> m) {
    double s = 0.0;
    for (NodeIndex l : tree.leaves()) {
      if (!(m[l] > 0.0)) return std::numeric_limits<double>::infinity();
      s += tree.path_prob(l) * utility.conjugate(y * m[l]);
    }
    return s;
  };
  if (vertices.size() == 1) return value(vertices.front());

  const Matrix basis = null_space(build_polytope(model).constraints);
  const std::size_t dim = basis.cols();
  if (dim > kMaxGridDimension) throw SizeGuardError("grid oracle needs a polytope of dimension at most 2");
  const std::size_t n = model.nodes();

  // Centre at the vertex barycentre; box the vertex coordinates.
  std::vector<double> centre(n, 0.0);
  for (const auto& v : vertices) {
    for (std::size_t j = 0; j < n; ++j) centre[j] += v[j] / static_cast<double>(vertices.size());
  }
  Grid box{std::vector<double>(dim, std::numeric_limits<double>::infinity()),
           std::vector<double>(dim, -std::numeric_limits<double>::infinity())};
  for (const auto& v : vertices) {
    for (std::size_t a = 0; a < dim; ++a) {
      double t = 0.0;
      for (std::size_t j = 0; j < n; ++j) t += basis(j, a) * (v[j] - centre[j]);
      box.lo[a] = std::min(box.lo[a], t);
      box.hi[a] = std::max(box.hi[a], t);
    }
  }

  std::vector<double> m(n);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_t(dim, 0.0);
  auto probe = [&](std::span<const double> t) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = centre[j];
      for (std::size_t a = 0; a < dim; ++a) s += basis(j, a) * t[a];
      if (s < 0.0) return;
      m[j] = s;
    }
    const double f = value(m);
    if (f < best) {
      best = f;
      best_t.assign(t.begin(), t.end());
    }
  };
  sweep(box, density, probe);
  if (!std::isfinite(best)) throw InternalError("grid oracle found no interior point");

  Grid fine{best_t, best_t};
  for (std::size_t a = 0; a < dim; ++a) {
    const double h = (box.hi[a] - box.lo[a]) / static_cast<double>(density - 1);
    fine.lo[a] -= h;
    fine.hi[a] += h;
  }
  sweep(fine, density, probe);
  return best;
}

bool oracle_complete(const MarketModel& model) { return oracle_complete(deflator_vertices(model)); }

bool oracle_complete(const VertexList& vertices) { return vertices.size() == 1; }

bool oracle_fair(const MarketModel& model) {
  const auto vertices = deflator_vertices(model);
  if (vertices.empty()) return false;
  for (NodeIndex j = 0; j < model.nodes(); ++j) {
    const bool positive = std::any_of(vertices.begin(), vertices.end(), [&](const auto& v) { return v[j] > 1e-10; });
    if (!positive) return false;
  }
  return true;
}

std::vector<double> finite_difference_gradient(const ScalarField& f, std::span<const double> x, double h) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::fabs(x[j]));
    point[j] = x[j] + step;
    const double up = f(point);
    point[j] = x[j] - step;
    const double down = f(point);
    point[j] = x[j];
    g[j] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace fm
