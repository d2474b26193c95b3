#include "fairmarket/deflator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fairmarket/errors.hpp"
#include "fairmarket/rng.hpp"

namespace fm {

namespace {

constexpr double kCertificateThreshold = 1e-9;

std::optional<ArbitrageCertificate> local_arbitrage(const MarketModel& model, NodeIndex n) {
  const auto& tree = model.tree();
  const auto kids = tree.children(n);
  const std::size_t d = model.assets();
  const std::size_t k = kids.size();
  // Columns: theta+ (d), theta- (d), z (k), v (k), u (k), w.
  const std::size_t zc = 2 * d;
  const std::size_t vc = zc + k;
  const std::size_t uc = vc + k;
  const std::size_t wc = uc + k;
  LinearProgram lp;
  lp.sense = Sense::maximize;
  lp.objective.assign(wc + 1, 0.0);
  for (std::size_t c = 0; c < k; ++c) lp.objective[zc + c] = 1.0;
  lp.constraints = Matrix(2 * k + 1, wc + 1);
  lp.rhs.assign(2 * k + 1, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    // theta.S(c) - z_c - v_c = 0 : payoff at least z_c
    for (std::size_t i = 0; i < d; ++i) {
      lp.constraints(c, i) = model.price(i, kids[c]);
      lp.constraints(c, d + i) = -model.price(i, kids[c]);
    }
    lp.constraints(c, zc + c) = -1.0;
    lp.constraints(c, vc + c) = -1.0;
    // z_c + u_c = 1
    lp.constraints(k + c, zc + c) = 1.0;
    lp.constraints(k + c, uc + c) = 1.0;
    lp.rhs[k + c] = 1.0;
  }
  // theta.S(n) + w = 0 : nonpositive cost
  for (std::size_t i = 0; i < d; ++i) {
    lp.constraints(2 * k, i) = model.price(i, n);
    lp.constraints(2 * k, d + i) = -model.price(i, n);
  }
  lp.constraints(2 * k, wc) = 1.0;

  const LPSolution sol = solve_lp(lp);
  if (!sol.optimal() || sol.value <= kCertificateThreshold) return std::nullopt;
  ArbitrageCertificate cert;
  cert.node = n;
  cert.holdings.resize(d);
  for (std::size_t i = 0; i < d; ++i) cert.holdings[i] = sol.x[i] - sol.x[d + i];
  cert.cost = model.value(cert.holdings, n);
  for (NodeIndex c : kids) cert.payoffs.push_back(model.value(cert.holdings, c));
  return cert;
}

}  // namespace

Deflator::Deflator(const MarketModel& model, std::vector<double> values) : values_(std::move(values)) {
  const double r = deflator_residual(model, values_);
  if (r > kDeflatorMartingaleTolerance) {
    throw ModelError("deflator martingale residual " + std::to_string(r) + " exceeds tolerance");
  }
}

MeasureWeights::MeasureWeights(std::vector<double> q) : q_(std::move(q)) {
  double sum = 0.0;
  for (double v : q_) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ModelError("measure is not equivalent to P (non-positive weight)");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-10) throw ModelError("measure weights do not sum to one");
}

DeflatorPolytope build_polytope(const MarketModel& model) {
  const auto& tree = model.tree();
  const std::size_t n = tree.size();
  DeflatorPolytope p;
  p.constraints = Matrix(model.assets() * tree.interior().size() + 1, n);
  std::size_t row = 0;
  for (NodeIndex node : tree.interior()) {
    for (std::size_t i = 0; i < model.assets(); ++i, ++row) {
      for (NodeIndex c : tree.children(node)) p.constraints(row, c) = tree.branch_prob(c) * model.price(i, c);
      p.constraints(row, node) = -model.price(i, node);
    }
  }
  p.constraints(row, ScenarioTree::root()) = 1.0;
  p.rhs.assign(p.constraints.rows(), 0.0);
  p.rhs.back() = 1.0;
  return p;
}

FairnessReport check_fair(const MarketModel& model) {
  const DeflatorPolytope poly = build_polytope(model);
  const std::size_t n = model.nodes();
  const std::size_t rows = poly.constraints.rows();
  // Variables: M (n), eps, slack (n); M[k] - eps - slack_k = 0.
  LinearProgram lp;
  lp.sense = Sense::maximize;
  lp.objective.assign(2 * n + 1, 0.0);
  lp.objective[n] = 1.0;
  lp.constraints = Matrix(rows + n, 2 * n + 1);
  lp.rhs.assign(rows + n, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) lp.constraints(r, j) = poly.constraints(r, j);
    lp.rhs[r] = poly.rhs[r];
  }
  for (std::size_t k = 0; k < n; ++k) {
    lp.constraints(rows + k, k) = 1.0;
    lp.constraints(rows + k, n) = -1.0;
    lp.constraints(rows + k, n + 1 + k) = -1.0;
  }

  FairnessReport report;
  const LPSolution sol = solve_lp(lp);
  if (sol.optimal()) {
    report.interior_radius = sol.x[n];
    if (sol.x[n] > kPositivityThreshold) {
      report.witness.emplace(model, std::vector<double>(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n)));
      report.fair = true;
      return report;
    }
    report.numerically_unfair = sol.x[n] > 0.0;
  }
  for (NodeIndex node : model.tree().interior()) {
    if (auto cert = local_arbitrage(model, node)) {
      report.certificate = std::move(cert);
      break;
    }
  }
  return report;
}

bool certificate_valid(const MarketModel& model, const ArbitrageCertificate& cert, double tol) {
  const auto& tree = model.tree();
  if (cert.node >= tree.size() || tree.is_leaf(cert.node) || cert.holdings.size() != model.assets()) return false;
  if (model.value(cert.holdings, cert.node) > tol) return false;
  bool positive = model.value(cert.holdings, cert.node) < -tol;
  for (NodeIndex c : tree.children(cert.node)) {
    const double payoff = model.value(cert.holdings, c);
    if (payoff < -tol) return false;
    positive = positive || payoff > tol;
  }
  return positive;
}

const Deflator& require_fair(const FairnessReport& report) {
  if (!report.fair || !report.witness) throw UnfairMarketError("market is not fair (no strictly positive martingale deflator)");
  return *report.witness;
}

std::size_t local_rank(const MarketModel& model, NodeIndex node) {
  const auto kids = model.tree().children(node);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(model.assets()), static_cast<Eigen::Index>(kids.size()));
  for (std::size_t i = 0; i < model.assets(); ++i) {
    for (std::size_t c = 0; c < kids.size(); ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = model.price(i, kids[c]);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-10 * s(0)) ++r;
  }
  return r;
}

CompletenessReport check_complete(const MarketModel& model) {
  require_fair(check_fair(model));
  CompletenessReport rep;
  for (NodeIndex node : model.tree().interior()) {
    rep.dimension += model.tree().children(node).size() - local_rank(model, node);
  }
  rep.complete = rep.dimension == 0;
  return rep;
}

MeasureWeights deflator_to_measure(const MarketModel& model, const Deflator& m) {
  const auto& tree = model.tree();
  std::vector<double> q;
  q.reserve(tree.leaves().size());
  for (NodeIndex l : tree.leaves()) q.push_back(tree.path_prob(l) * m[l] * model.numeraire()[l]);
  return MeasureWeights(std::move(q));
}

Deflator measure_to_deflator(const MarketModel& model, const MeasureWeights& q) {
  const auto& tree = model.tree();
  const auto leaves = tree.leaves();
  if (q.values().size() != leaves.size()) throw ModelError("measure has the wrong number of leaf weights");
  std::vector<double> ms(leaves.size());
  for (std::size_t k = 0; k < leaves.size(); ++k) ms[k] = q[k] / tree.path_prob(leaves[k]);
  // ms holds M S* at the leaves; roll it back and divide by S*.
  std::vector<double> m = conditional_expectation(tree, ms);
  for (NodeIndex n = 0; n < tree.size(); ++n) m[n] /= model.numeraire()[n];
  return Deflator(model, std::move(m));
}

LinearProgram local_program(const MarketModel& model, NodeIndex node, std::span<const double> child_values,
                            Sense sense) {
  const auto& tree = model.tree();
  const auto kids = tree.children(node);
  if (child_values.size() != kids.size()) throw ModelError("child value count does not match the node");
  LinearProgram lp;
  lp.sense = sense;
  lp.constraints = Matrix(model.assets(), kids.size());
  lp.rhs.resize(model.assets());
  lp.objective.resize(kids.size());
  for (std::size_t c = 0; c < kids.size(); ++c) {
    const double p = tree.branch_prob(kids[c]);
    lp.objective[c] = p * child_values[c];
    for (std::size_t i = 0; i < model.assets(); ++i) lp.constraints(i, c) = p * model.price(i, kids[c]);
  }
  for (std::size_t i = 0; i < model.assets(); ++i) lp.rhs[i] = model.price(i, node);
  return lp;
}

std::vector<Deflator> sample_deflators(const MarketModel& model, std::size_t count, std::uint64_t seed) {
  const FairnessReport fairness = check_fair(model);
  const Deflator& witness = require_fair(fairness);
  const DeflatorPolytope poly = build_polytope(model);
  const std::size_t n = model.nodes();
  Rng rng(seed);

  std::vector<std::vector<double>> vertices;
  if (!check_complete(model).complete) {
    LinearProgram lp;
    lp.constraints = poly.constraints;
    lp.rhs = poly.rhs;
    lp.sense = Sense::maximize;
    const std::size_t probes = std::min<std::size_t>(4 + 2 * n, 24);
    for (std::size_t k = 0; k < probes; ++k) {
      lp.objective.resize(n);
      for (double& c : lp.objective) c = rng.uniform(-1.0, 1.0);
      const LPSolution s = solve_lp(lp);
      if (!s.optimal()) throw InternalError("deflator polytope LP failed while sampling");
      const bool seen = std::any_of(vertices.begin(), vertices.end(), [&](const std::vector<double>& v) {
        double dist = 0.0;
        for (std::size_t j = 0; j < n; ++j) dist = std::max(dist, std::fabs(v[j] - s.x[j]));
        return dist <= 1e-9;
      });
      if (!seen) vertices.push_back(s.x);
    }
  }

  std::vector<Deflator> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<double> point(witness.values().begin(), witness.values().end());
    if (!vertices.empty()) {
      std::vector<double> w(vertices.size());
      double total = 0.0;
      for (double& x : w) {
        x = -std::log(1.0 - rng.uniform());
        total += x;
      }
      for (std::size_t j = 0; j < n; ++j) {
        double mix = 0.0;
        for (std::size_t v = 0; v < vertices.size(); ++v) mix += w[v] / total * vertices[v][j];
        point[j] = 0.5 * point[j] + 0.5 * mix;
      }
      point[ScenarioTree::root()] = 1.0;
    }
    out.emplace_back(model, std::move(point));
  }
  return out;
}

}  // namespace fm
