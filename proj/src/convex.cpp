#include "fairmarket/convex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fairmarket/errors.hpp"
#include "fairmarket/kernels.hpp"
#include "fairmarket/lp.hpp"

namespace fm {

namespace {

using Vec = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec combine(std::span<const double> x, double step, std::span<const double> d) {
  Vec out(x.begin(), x.end());
  kernels::axpy(step, d, out);
  return out;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double t) { return std::isfinite(t); });
}

class Driver {
 public:
  Driver(const ConvexProblem& p, const ConvexOptions& o) : p_(p), opt_(o), n_(p.constraints.cols()) {
    lmo_.constraints = p.constraints;
    lmo_.rhs = p.rhs;
    lmo_.sense = Sense::minimize;
    if (p.hessian_diagonal) hull_ = null_space(p.constraints);
  }

  double f(std::span<const double> x) const { return p_.objective(x); }

  Vec grad(std::span<const double> x) const {
    Vec g(x.size());
    p_.gradient(x, g);
    return g;
  }

  // phi'(t) for phi(t) = f(x + t d); +inf where the gradient blows up.
  double slope(std::span<const double> x, std::span<const double> d, double t) const {
    const Vec y = combine(x, t, d);
    const Vec g = grad(y);
    const double s = kernels::dot(g, d);
    return std::isfinite(s) ? s : kInf;
  }

  // Exact line search on [0, tmax] by bisection on the directional derivative.
  double line_search(std::span<const double> x, std::span<const double> d, double tmax) const {
    if (!(tmax > 0.0)) return 0.0;
    if (slope(x, d, 0.0) >= 0.0) return 0.0;
    const double end_slope = slope(x, d, tmax);
    if (end_slope <= 0.0 && std::isfinite(f(combine(x, tmax, d)))) return tmax;
    double lo = 0.0;
    double hi = tmax;
    for (int k = 0; k < 200 && hi - lo > 1e-17 * tmax; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (slope(x, d, mid) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  // Damped Newton step within the affine hull; empty when no descent is found.
  Vec newton(std::span<const double> x, std::span<const double> g, double fx) const {
    const std::size_t k = hull_.cols();
    if (k == 0) return {};
    Vec h(n_);
    p_.hessian_diagonal(x, h);
    if (!all_finite(h)) return {};
    Eigen::MatrixXd reduced = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    Eigen::VectorXd rg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < n_; ++j) {
      const auto zj = hull_.row(j);
      for (std::size_t a = 0; a < k; ++a) {
        rg(static_cast<Eigen::Index>(a)) += zj[a] * g[j];
        if (h[j] == 0.0) continue;
        for (std::size_t b = 0; b <= a; ++b) {
          reduced(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += zj[a] * h[j] * zj[b];
        }
      }
    }
    reduced = reduced.selfadjointView<Eigen::Lower>();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return {};
    const Eigen::VectorXd z = ldlt.solve(-rg);
    if (!z.allFinite()) return {};
    Vec d(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const auto zj = hull_.row(j);
      for (std::size_t a = 0; a < k; ++a) d[j] += zj[a] * z(static_cast<Eigen::Index>(a));
    }
    const double descent = kernels::dot(g, d);
    if (!(descent < 0.0)) return {};
    double t = 1.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (d[j] < 0.0) t = std::min(t, -0.995 * x[j] / d[j]);
    }
    for (int k2 = 0; k2 < 60 && t > 0.0; ++k2, t *= 0.5) {
      Vec y = combine(x, t, d);
      const double fy = f(y);
      if (std::isfinite(fy) && fy <= fx + 1e-4 * t * descent &&
          *std::min_element(y.begin(), y.end()) > 0.0) {
        return y;
      }
    }
    return {};
  }

  ConvexResult run(std::span<const double> start) {
    ConvexResult res;
    Vec x(start.begin(), start.end());
    std::vector<Vec> atoms{x};
    Vec weights{1.0};
    res.smallest_coordinate = *std::min_element(x.begin(), x.end());

    for (res.iterations = 0; res.iterations < opt_.max_iterations; ++res.iterations) {
      const double fx = f(x);
      const Vec g = grad(x);
      if (!std::isfinite(fx) || !all_finite(g)) {
        throw InternalError("objective or gradient is not finite at a feasible iterate");
      }
      lmo_.objective = g;
      const LPSolution s = solve_lp(lmo_);
      if (!s.optimal()) throw InternalError("linear minimisation oracle failed: " + std::string(to_string(s.status)));
      const double gx = kernels::dot(g, x);
      res.gap = std::max(0.0, gx - s.value);
      if (res.gap <= opt_.tolerance) {
        res.converged = true;
        break;
      }

      if (!hull_.empty()) {
        Vec y = newton(x, g, fx);
        if (!y.empty()) {
          x = std::move(y);
          atoms.assign(1, x);
          weights.assign(1, 1.0);
          ++res.newton_steps;
          res.smallest_coordinate = std::min(res.smallest_coordinate, *std::min_element(x.begin(), x.end()));
          continue;
        }
      }

      // Away atom: the active atom with the largest g.v.
      std::size_t away = 0;
      double away_val = -kInf;
      for (std::size_t a = 0; a < atoms.size(); ++a) {
        const double v = kernels::dot(g, atoms[a]);
        if (v > away_val) {
          away_val = v;
          away = a;
        }
      }
      Vec d(n_);
      double tmax = 1.0;
      bool toward = gx - s.value >= away_val - gx || weights[away] >= 1.0;
      if (toward) {
        for (std::size_t j = 0; j < n_; ++j) d[j] = s.x[j] - x[j];
      } else {
        for (std::size_t j = 0; j < n_; ++j) d[j] = x[j] - atoms[away][j];
        tmax = weights[away] / (1.0 - weights[away]);
      }
      const double t = line_search(x, d, tmax);
      if (t <= 0.0) {
        // No progress possible in floating point; report the current gap.
        break;
      }
      kernels::axpy(t, d, x);
      if (toward) {
        for (double& w : weights) w *= (1.0 - t);
        std::size_t hit = atoms.size();
        for (std::size_t a = 0; a < atoms.size(); ++a) {
          double dist = 0.0;
          for (std::size_t j = 0; j < n_; ++j) dist = std::max(dist, std::fabs(atoms[a][j] - s.x[j]));
          if (dist <= 1e-12) {
            hit = a;
            break;
          }
        }
        if (hit == atoms.size()) {
          atoms.push_back(s.x);
          weights.push_back(t);
        } else {
          weights[hit] += t;
        }
      } else {
        for (double& w : weights) w *= (1.0 + t);
        weights[away] -= t;
      }
      for (std::size_t a = atoms.size(); a-- > 0;) {
        if (weights[a] <= 1e-15) {
          atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(a));
          weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(a));
        }
      }
      res.smallest_coordinate = std::min(res.smallest_coordinate, *std::min_element(x.begin(), x.end()));
    }

    res.value = f(x);
    res.minimizer = std::move(x);
    return res;
  }

 private:
  const ConvexProblem& p_;
  ConvexOptions opt_;
  std::size_t n_;
  LinearProgram lmo_;
  Matrix hull_;
};

}  // namespace

Matrix null_space(const Matrix& a) {
  const std::size_t n = a.cols();
  if (a.rows() == 0) {
    Matrix id(n, n);
    for (std::size_t j = 0; j < n; ++j) id(j, j) = 1.0;
    return id;
  }
  Eigen::MatrixXd A(a.rows(), n);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(0) > 0.0 && s(i) > 1e-10 * s(0)) ++rank;
  }
  const std::size_t k = n - rank;
  Matrix z(n, k);
  const Eigen::MatrixXd& v = svd.matrixV();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < k; ++c) z(j, c) = v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(rank + c));
  }
  return z;
}

ConvexResult minimize_convex(const ConvexProblem& problem, std::span<const double> start,
                             const ConvexOptions& options) {
  const std::size_t n = problem.constraints.cols();
  if (start.size() != n) throw ModelError("start point has the wrong dimension");
  if (!problem.objective || !problem.gradient) throw ModelError("convex problem needs objective and gradient");
  for (std::size_t i = 0; i < problem.rhs.size(); ++i) {
    const double r = kernels::dot(problem.constraints.row(i), start) - problem.rhs[i];
    if (std::fabs(r) > 1e-8 * std::max(1.0, std::fabs(problem.rhs[i]))) {
      throw ModelError("start point violates equality row " + std::to_string(i));
    }
  }
  if (*std::min_element(start.begin(), start.end()) < 0.0) throw ModelError("start point is not nonnegative");
  Driver driver(problem, options);
  return driver.run(start);
}

}  // namespace fm
