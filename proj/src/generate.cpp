#include "fairmarket/generate.hpp"

#include <algorithm>
#include <string>

#include "fairmarket/errors.hpp"
#include "fairmarket/rng.hpp"

namespace fm {

namespace {

constexpr double kRuinChance = 0.05;

// Weights drawn from [lo, hi), normalised so they sum to exactly `total`
// up to rounding.
std::vector<double> normalised(Rng& rng, std::size_t k, double lo, double hi) {
  std::vector<double> w(k);
  double s = 0.0;
  for (double& x : w) {
    x = rng.uniform(lo, hi);
    s += x;
  }
  for (double& x : w) x /= s;
  return w;
}

}  // namespace

MarketModel generate_market(const GeneratorOptions& o) {
  if (o.depth < 0 || o.depth > 6) throw ModelError("depth must be between 0 and 6");
  if (o.branching < 1 || o.branching > 4) throw ModelError("branching must be between 1 and 4");
  if (o.assets < 1 || o.assets > 5) throw ModelError("assets must be between 1 and 5");
  Rng rng(o.seed);

  // Tree, breadth first.
  std::vector<NodeSpec> specs{{"r", std::nullopt, 1.0}};
  std::vector<std::size_t> frontier{0};
  std::vector<std::vector<std::size_t>> kids(1);
  for (int t = 0; t < o.depth; ++t) {
    std::vector<std::size_t> next;
    for (std::size_t n : frontier) {
      const int lo = std::min(2, o.branching);
      const auto k = static_cast<std::size_t>(rng.integer(lo, o.branching));
      const std::vector<double> p = normalised(rng, k, 0.2, 1.0);
      for (std::size_t c = 0; c < k; ++c) {
        specs.push_back({specs[n].id + std::to_string(c), specs[n].id, p[c]});
        kids[n].push_back(specs.size() - 1);
        kids.emplace_back();
        next.push_back(specs.size() - 1);
      }
    }
    frontier = std::move(next);
  }
  ScenarioTree tree = ScenarioTree::create(specs);
  const std::size_t nodes = specs.size();
  const auto d = static_cast<std::size_t>(o.assets);

  Matrix prices(d + (o.arbitrage ? 1 : 0), nodes, 0.0);
  for (std::size_t n = 0; n < nodes; ++n) prices(0, n) = 1.0;
  for (std::size_t i = 1; i < d; ++i) prices(i, 0) = rng.uniform(0.5, 2.0);

  for (std::size_t n = 0; n < nodes; ++n) {
    const auto& ch = kids[n];
    if (ch.empty()) continue;
    // Ratios m_c with sum p_c m_c = 1.
    std::vector<double> m(ch.size());
    double pm = 0.0;
    for (std::size_t c = 0; c < ch.size(); ++c) {
      m[c] = rng.uniform(0.5, 1.5);
      pm += specs[ch[c]].prob * m[c];
    }
    for (double& x : m) x /= pm;

    for (std::size_t i = 1; i < d; ++i) {
      const double s = prices(i, n);
      if (s == 0.0) continue;  // absorbing
      std::vector<double> a(ch.size());
      for (double& x : a) x = rng.uniform(0.4, 1.6);
      if (ch.size() >= 2 && rng.uniform() < kRuinChance) {
        a[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(ch.size()) - 1))] = 0.0;
      }
      double e = 0.0;
      for (std::size_t c = 0; c < ch.size(); ++c) e += specs[ch[c]].prob * m[c] * a[c];
      for (std::size_t c = 0; c < ch.size(); ++c) prices(i, ch[c]) = s * a[c] / e;
    }
  }

  std::vector<std::string> names{"bond"};
  for (std::size_t i = 1; i < d; ++i) names.push_back("stock" + std::to_string(i));

  if (o.arbitrage) {
    std::vector<std::size_t> interior;
    for (std::size_t n = 0; n < nodes; ++n) {
      if (kids[n].size() >= 1) interior.push_back(n);
    }
    if (interior.empty()) throw ModelError("an arbitrage variant needs depth at least 1");
    const std::size_t n = interior[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(interior.size()) - 1))];
    const std::size_t c = kids[n][static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(kids[n].size()) - 1))];
    const double bonus = rng.uniform(0.05, 0.5);
    for (std::size_t k = 0; k < nodes; ++k) prices(d, k) = prices(0, k);
    // Mark the subtree of c (descendants follow their parent in the list).
    std::vector<bool> below(nodes, false);
    below[c] = true;
    for (std::size_t k = c + 1; k < nodes; ++k) {
      if (specs[k].parent) {
        const auto parent = tree.find(*specs[k].parent);
        below[k] = below[*parent];
      }
    }
    for (std::size_t k = 0; k < nodes; ++k) {
      if (below[k]) prices(d, k) += bonus;
    }
    names.push_back("arb");
  }
  return build_market(std::move(tree), std::move(prices), std::move(names));
}

Claim random_claim(const MarketModel& model, std::uint64_t seed, std::string name) {
  Rng rng(seed);
  std::vector<double> payoff(model.tree().leaves().size());
  for (double& x : payoff) x = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 2.0);
  return Claim(std::move(payoff), std::move(name));
}

}  // namespace fm
