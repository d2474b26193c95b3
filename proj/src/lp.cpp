#include "fairmarket/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "fairmarket/errors.hpp"
#include "fairmarket/kernels.hpp"

namespace fm {

std::string_view to_string(LPStatus status) noexcept {
  switch (status) {
    case LPStatus::optimal:
      return "optimal";
    case LPStatus::infeasible:
      return "infeasible";
    case LPStatus::unbounded:
      return "unbounded";
  }
  return "unknown";
}

namespace {

// Tableau layout: columns [0, n) structural, [n, n+m) artificial, n+m the
// right-hand side. The objective row holds reduced costs and, in the rhs
// column, minus the current objective value.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t structural)
      : m_(rows), n_(structural), width_(structural + rows + 1), cells_(rows, width_), obj_(width_, 0.0), basis_(rows) {}

  std::size_t rows() const noexcept { return m_; }
  std::size_t structural() const noexcept { return n_; }
  std::size_t rhs_col() const noexcept { return width_ - 1; }
  Matrix& cells() noexcept { return cells_; }
  std::vector<double>& objective() noexcept { return obj_; }
  std::vector<std::size_t>& basis() noexcept { return basis_; }
  void set_harris(double delta) noexcept { harris_ = delta; }

  void pivot(std::size_t r, std::size_t e) {
    auto prow = cells_.row(r);
    kernels::scale(1.0 / prow[e], prow);
    prow[e] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      auto row = cells_.row(i);
      const double f = row[e];
      if (f != 0.0) {
        kernels::axpy(-f, prow, row);
        row[e] = 0.0;
      }
    }
    const double f = obj_[e];
    if (f != 0.0) {
      kernels::axpy(-f, prow, obj_);
      obj_[e] = 0.0;
    }
    basis_[r] = e;
  }

  // Runs Bland-rule simplex iterations over entering columns [0, allowed).
  // Returns false when the problem is unbounded in the current phase.
  bool iterate(std::size_t allowed, const LPOptions& opt, std::size_t& pivots) {
    const std::size_t rhs = rhs_col();
    for (;;) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (obj_[j] < -opt.optimality_tolerance) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;

      // Harris two-pass ratio test: bound the step with slightly relaxed
      // rows, then take the largest pivot among rows within the bound.
      double bound = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = cells_(i, enter);
        if (a > opt.pivot_tolerance) bound = std::min(bound, (std::max(0.0, cells_(i, rhs)) + harris_) / a);
      }
      if (!std::isfinite(bound)) return false;
      std::size_t leave = m_;
      double pivot_mag = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = cells_(i, enter);
        if (a <= opt.pivot_tolerance || std::max(0.0, cells_(i, rhs)) / a > bound) continue;
        if (a > pivot_mag || (a == pivot_mag && basis_[i] < basis_[leave])) {
          pivot_mag = a;
          leave = i;
        }
      }
      pivot(leave, enter);
      if (++pivots > opt.max_pivots) {
        throw InternalError("simplex pivot guard exceeded; cycling suspected");
      }
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  Matrix cells_;
  std::vector<double> obj_;
  std::vector<std::size_t> basis_;
  double harris_ = 0.0;
};

}  // namespace

LPSolution solve_lp(const LinearProgram& lp, const LPOptions& opt) {
  const std::size_t n = lp.variables();
  const std::size_t m = lp.equalities();
  if (lp.constraints.rows() != m || (m > 0 && lp.constraints.cols() != n)) {
    throw ModelError("linear program dimensions are inconsistent");
  }
  if (!lp.lower.empty() && lp.lower.size() != n) throw ModelError("lower bound vector has the wrong length");
  for (double v : lp.rhs) {
    if (!std::isfinite(v)) throw ModelError("linear program right-hand side is not finite");
  }

  std::vector<double> lower = lp.lower.empty() ? std::vector<double>(n, 0.0) : lp.lower;
  const double sign = lp.sense == Sense::maximize ? -1.0 : 1.0;

  Tableau t(m, n);
  Matrix& cells = t.cells();
  const std::size_t rhs = t.rhs_col();
  std::vector<double> row_sign(m, 1.0);
  double rhs_scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    double bi = lp.rhs[i];
    for (std::size_t j = 0; j < n; ++j) bi -= lp.constraints(i, j) * lower[j];
    row_sign[i] = bi < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) cells(i, j) = row_sign[i] * lp.constraints(i, j);
    cells(i, n + i) = 1.0;
    cells(i, rhs) = row_sign[i] * bi;
    rhs_scale = std::max(rhs_scale, std::fabs(bi));
    t.basis()[i] = n + i;
  }

  t.set_harris(1e-12 * rhs_scale);

  LPSolution sol;
  // Phase 1: minimise the sum of artificials.
  auto& obj = t.objective();
  std::fill(obj.begin(), obj.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto row = cells.row(i);
    for (std::size_t j = 0; j < n; ++j) obj[j] -= row[j];
    obj[rhs] -= row[rhs];
  }
  t.iterate(n + m, opt, sol.pivots);
  if (-obj[rhs] > opt.feasibility_tolerance * rhs_scale) {
    sol.status = LPStatus::infeasible;
    return sol;
  }
  // Drive remaining artificials out of the basis; rows with no structural
  // entry are redundant and keep their artificial at zero.
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis()[i] < n) continue;
    std::size_t best = n;
    double mag = opt.pivot_tolerance;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(cells(i, j)) > mag) {
        mag = std::fabs(cells(i, j));
        best = j;
      }
    }
    if (best < n) t.pivot(i, best);
  }

  // Phase 2 on the structural columns.
  std::fill(obj.begin(), obj.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) obj[j] = sign * lp.objective[j];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bj = t.basis()[i];
    const double cb = bj < n ? sign * lp.objective[bj] : 0.0;
    if (cb != 0.0) kernels::axpy(-cb, cells.row(i), obj);
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis()[i] < n) obj[t.basis()[i]] = 0.0;
  }
  if (!t.iterate(n, opt, sol.pivots)) {
    sol.status = LPStatus::unbounded;
    return sol;
  }

  sol.status = LPStatus::optimal;
  sol.x = lower;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bj = t.basis()[i];
    if (bj < n) sol.x[bj] += std::max(0.0, cells(i, rhs));
  }
  sol.duals.resize(m);
  for (std::size_t k = 0; k < m; ++k) sol.duals[k] = sign * row_sign[k] * (-obj[n + k]);
  sol.reduced_costs = lp.objective;
  for (std::size_t i = 0; i < m; ++i) {
    if (sol.duals[i] != 0.0) kernels::axpy(-sol.duals[i], lp.constraints.row(i), sol.reduced_costs);
  }
  sol.value = kernels::dot(lp.objective, sol.x);
  return sol;
}

KKTResiduals kkt_residuals(const LinearProgram& lp, const LPSolution& s) {
  KKTResiduals r;
  const std::size_t n = lp.variables();
  std::vector<double> lower = lp.lower.empty() ? std::vector<double>(n, 0.0) : lp.lower;
  for (std::size_t i = 0; i < lp.equalities(); ++i) {
    r.primal = std::max(r.primal, std::fabs(kernels::dot(lp.constraints.row(i), s.x) - lp.rhs[i]));
  }
  double dual_obj = kernels::dot(lp.rhs, s.duals);
  for (std::size_t j = 0; j < n; ++j) {
    r.primal = std::max(r.primal, lower[j] - s.x[j]);
    const double rc = s.reduced_costs[j];
    const double wrong = lp.sense == Sense::minimize ? -rc : rc;
    r.dual = std::max(r.dual, wrong);
    r.complementarity = std::max(r.complementarity, std::fabs(rc * (s.x[j] - lower[j])));
    dual_obj += rc * lower[j];
  }
  r.gap = std::fabs(s.value - dual_obj);
  return r;
}

}  // namespace fm
