#include "fairmarket/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "fairmarket/deflator.hpp"
#include "fairmarket/errors.hpp"
#include "fairmarket/generate.hpp"
#include "fairmarket/io.hpp"
#include "fairmarket/oracle.hpp"
#include "fairmarket/superhedge.hpp"
#include "fairmarket/utility_dual.hpp"

namespace fm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDualOracleTolerance = 1e-4;
constexpr double kAugmentTolerance = 1e-7;
constexpr double kPathwiseSlack = 1e-9;

struct Settings {
  std::string command;
  std::vector<std::string> files;
  std::string claim;
  std::string utility = "log";
  std::string deflator = "witness";
  double wealth = 1.0;
  double tolerance = 1e-8;
  bool verify = false;
  std::string format = "report";
  unsigned jobs = 1;
  GeneratorOptions gen;
};

struct Column {
  std::string name;
  std::vector<double> values;  // node-indexed, NaN prints blank
};

struct Outcome {
  std::string path;
  Json report = Json::object();
  std::vector<Column> columns;
  std::optional<ScenarioTree> tree;
  int code = kExitOk;
};

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json by_node(const ScenarioTree& t, std::span<const double> v) {
  Json o = Json::object();
  for (NodeIndex n = 0; n < t.size(); ++n) o[t.id(n)] = num(v[n]);
  return o;
}

Json holdings_json(const MarketModel& m, const Strategy& s) {
  Json o = Json::object();
  for (NodeIndex n : m.tree().interior()) {
    Json h = Json::object();
    for (std::size_t i = 0; i < m.assets(); ++i) h[m.asset_name(i)] = num(s(n, i));
    o[m.tree().id(n)] = std::move(h);
  }
  return o;
}

void add_holdings_columns(const MarketModel& m, const Strategy& s, std::vector<Column>& cols) {
  for (std::size_t i = 0; i < m.assets(); ++i) {
    Column c{"theta_" + m.asset_name(i), std::vector<double>(m.nodes(), kNaN)};
    for (NodeIndex n : m.tree().interior()) c.values[n] = s(n, i);
    cols.push_back(std::move(c));
  }
}

Json interval_json(const PriceInterval& iv) { return Json{{"lower", num(iv.lower)}, {"upper", num(iv.upper)}}; }

class Verifier {
 public:
  explicit Verifier(bool enabled) : enabled_(enabled) {}
  bool enabled() const noexcept { return enabled_; }

  void agree(const std::string& quantity, double oracle, double engine, double tol) {
    const OracleReport r = compare(quantity, oracle, engine);
    const bool ok = r.abs_diff <= tol;
    records_.push_back(Json{{"quantity", r.quantity},
                            {"oracle", num(r.oracle)},
                            {"engine", num(r.engine)},
                            {"abs_diff", num(r.abs_diff)},
                            {"rel_diff", num(r.rel_diff)},
                            {"tolerance", tol},
                            {"ok", ok}});
    ok_ = ok_ && ok;
  }

  void holds(const std::string& property, bool ok) {
    records_.push_back(Json{{"quantity", property}, {"ok", ok}});
    ok_ = ok_ && ok;
  }

  // Oracles are exponential-time; past the size guard the check is skipped.
  template <class F>
  void guarded(const std::string& quantity, F&& f) {
    try {
      f();
    } catch (const SizeGuardError& e) {
      records_.push_back(Json{{"quantity", quantity}, {"skipped", e.what()}});
    }
  }

  void finish(Outcome& o) const {
    if (!enabled_) return;
    o.report["verification"] = Json{{"ok", ok_}, {"checks", records_}};
    if (!ok_ && o.code == kExitOk) o.code = kExitInternal;
  }

 private:
  bool enabled_;
  bool ok_ = true;
  Json records_ = Json::array();
};

void cmd_validate(const MarketDocument& doc, Outcome& o) {
  const MarketModel& m = doc.model;
  Json claims = Json::array();
  for (const Claim& c : doc.claims) claims.push_back(c.name());
  o.report["valid"] = true;
  o.report["nodes"] = m.nodes();
  o.report["leaves"] = m.tree().leaves().size();
  o.report["horizon"] = m.tree().horizon();
  o.report["assets"] = Json(std::vector<std::string>(m.asset_names().begin(), m.asset_names().end()));
  o.report["claims"] = std::move(claims);
  for (std::size_t i = 0; i < m.assets(); ++i) {
    const auto row = m.prices().row(i);
    o.columns.push_back({m.asset_name(i), {row.begin(), row.end()}});
  }
  o.columns.push_back({"numeraire", {m.numeraire().begin(), m.numeraire().end()}});
}

void cmd_fair(const MarketDocument& doc, Verifier& v, Outcome& o) {
  const MarketModel& m = doc.model;
  const auto& t = m.tree();
  const FairnessReport rep = check_fair(m);
  o.report["verdict"] = rep.fair ? "fair" : "unfair";
  o.report["fair"] = rep.fair;
  o.report["interior_radius"] = rep.interior_radius ? num(*rep.interior_radius) : Json(nullptr);
  o.report["numerically_unfair"] = rep.numerically_unfair;
  if (rep.witness) {
    o.report["witness"] = by_node(t, rep.witness->values());
    o.columns.push_back({"deflator", {rep.witness->values().begin(), rep.witness->values().end()}});
  }
  if (rep.certificate) {
    const ArbitrageCertificate& c = *rep.certificate;
    Json h = Json::object();
    for (std::size_t i = 0; i < m.assets(); ++i) h[m.asset_name(i)] = num(c.holdings[i]);
    Json pay = Json::object();
    const auto kids = t.children(c.node);
    for (std::size_t k = 0; k < kids.size(); ++k) pay[t.id(kids[k])] = num(c.payoffs[k]);
    o.report["certificate"] = Json{{"node", t.id(c.node)}, {"holdings", std::move(h)}, {"cost", num(c.cost)},
                                   {"payoffs", std::move(pay)}};
  }
  if (v.enabled()) {
    if (!rep.fair) v.holds("arbitrage certificate is valid", rep.certificate && certificate_valid(m, *rep.certificate));
    v.guarded("fairness vs vertex oracle", [&] { v.holds("fairness vs vertex oracle", oracle_fair(m) == rep.fair); });
  }
  if (!rep.fair) o.code = kExitVerdict;
}

void cmd_complete(const MarketDocument& doc, Verifier& v, Outcome& o) {
  const CompletenessReport rep = check_complete(doc.model);
  o.report["verdict"] = rep.complete ? "complete" : "incomplete";
  o.report["complete"] = rep.complete;
  o.report["dimension"] = rep.dimension;
  if (v.enabled()) {
    v.holds("completeness via unit claims", completeness_via_claims(doc.model) == rep.complete);
    v.guarded("completeness vs vertex oracle",
              [&] { v.holds("completeness vs vertex oracle", oracle_complete(doc.model) == rep.complete); });
  }
}

void cmd_superhedge(const MarketDocument& doc, const Settings& s, Verifier& v, Outcome& o) {
  const MarketModel& m = doc.model;
  const auto& t = m.tree();
  const Claim& claim = doc.claim(s.claim);
  const AttainabilityVerdict verdict = classify_attainability(m, claim);
  const std::vector<double> process = superhedge_process(m, claim);
  o.report["claim"] = claim.name();
  o.report["interval"] = interval_json(verdict.interval);
  o.report["verdict"] = std::string(to_string(verdict.kind));
  o.report["attainability"] = std::string(to_string(verdict.kind));
  o.report["face_radius"] = num(verdict.face_radius);
  o.report["supporting_deflator"] = by_node(t, verdict.deflator);
  o.report["upper_deflator"] = by_node(t, verdict.interval.upper_deflator);
  o.report["lower_deflator"] = by_node(t, verdict.interval.lower_deflator);
  o.report["value_process"] = by_node(t, process);
  o.columns.push_back({"superhedge_value", process});
  o.columns.push_back({"upper_deflator", verdict.interval.upper_deflator});
  if (v.enabled()) {
    v.agree("backward induction vs LP upper price", verdict.interval.upper, process[ScenarioTree::root()],
            s.tolerance);
    v.guarded("vertex oracle upper price",
              [&] { v.agree("vertex oracle upper price", oracle_superhedge(m, claim), verdict.interval.upper, s.tolerance); });
  }
}

void cmd_decompose(const MarketDocument& doc, const Settings& s, Verifier& v, Outcome& o) {
  const MarketModel& m = doc.model;
  const auto& t = m.tree();
  const Claim& claim = doc.claim(s.claim);
  const std::vector<double> process = superhedge_process(m, claim);
  const DecompositionResult dec = optional_decomposition(m, process);
  o.report["claim"] = claim.name();
  o.report["initial_value"] = num(process[ScenarioTree::root()]);
  o.report["value_process"] = by_node(t, process);
  o.report["strategy"] = holdings_json(m, dec.phi);
  o.report["consumption"] = by_node(t, dec.consumption);
  o.report["hedge_value"] = by_node(t, dec.hedge_value);
  o.columns.push_back({"value", process});
  o.columns.push_back({"hedge_value", dec.hedge_value});
  o.columns.push_back({"consumption", dec.consumption});
  add_holdings_columns(m, dec.phi, o.columns);
  if (v.enabled()) {
    bool dominates = true;
    for (NodeIndex l : t.leaves()) {
      if (l != ScenarioTree::root()) dominates = dominates && dec.hedge_value[l] >= claim[t.leaf_position(l)] - kPathwiseSlack;
    }
    bool increasing = dec.consumption[ScenarioTree::root()] == 0.0;
    for (NodeIndex n = 1; n < t.size(); ++n) increasing = increasing && dec.consumption[n] >= dec.consumption[*t.parent(n)] - kPathwiseSlack;
    v.holds("hedge dominates the claim pathwise", dominates);
    v.holds("consumption is nondecreasing from zero", increasing);
    v.guarded("vertex oracle initial value", [&] {
      v.agree("vertex oracle initial value", oracle_superhedge(m, claim), process[ScenarioTree::root()], s.tolerance);
    });
  }
}

void cmd_optimize(const MarketDocument& doc, const Settings& s, Verifier& v, Outcome& o) {
  const MarketModel& m = doc.model;
  const auto& t = m.tree();
  const Utility u = Utility::parse(s.utility);
  const PrimalSolution p = solve_primal(m, u, s.wealth);
  const DualSolution d = solve_dual(m, u, p.y);
  o.report["utility"] = u.name();
  o.report["wealth"] = s.wealth;
  o.report["y"] = num(p.y);
  o.report["expected_utility"] = num(p.value);
  o.report["dual_value"] = num(d.value);
  o.report["dual_gap"] = num(d.gap);
  o.report["conjugacy_residual"] = num(std::fabs(p.value - (d.value + s.wealth * p.y)));
  o.report["budget_residual"] = num(p.budget_residual);
  o.report["martingale_residual"] = num(p.martingale_residual);
  o.report["max_consumption"] = num(p.max_consumption);
  o.report["deflator"] = by_node(t, p.deflator.values());
  o.report["optimal_wealth"] = by_node(t, p.wealth);
  o.report["strategy"] = holdings_json(m, p.strategy);
  o.columns.push_back({"deflator", {p.deflator.values().begin(), p.deflator.values().end()}});
  o.columns.push_back({"wealth", p.wealth});
  add_holdings_columns(m, p.strategy, o.columns);
  if (v.enabled()) {
    v.guarded("grid oracle dual value", [&] {
      const double grid = oracle_dual(m, u, p.y);
      v.agree("grid oracle dual value", grid, d.value, std::max(s.tolerance, kDualOracleTolerance));
      v.holds("grid value not below engine minimum", grid >= d.value - 1e-9);
    });
    v.holds("budget residual within 1e-8", p.budget_residual <= kBudgetTolerance);
  }
}

void cmd_davis(const MarketDocument& doc, const Settings& s, Verifier& v, Outcome& o) {
  const MarketModel& m = doc.model;
  const Utility u = Utility::parse(s.utility);
  const Claim& claim = doc.claim(s.claim);
  const DavisPrice dp = davis_price(m, u, s.wealth, claim);
  const PriceInterval iv = superhedge_price(m, claim);
  const bool inside = dp.price >= iv.lower - kIntervalTolerance && dp.price <= iv.upper + kIntervalTolerance;
  o.report["utility"] = u.name();
  o.report["wealth"] = s.wealth;
  o.report["claim"] = claim.name();
  o.report["price"] = num(dp.price);
  o.report["deflator_price"] = num(dp.deflator_price);
  o.report["residual"] = num(dp.residual);
  o.report["interval"] = interval_json(iv);
  o.report["inside_interval"] = inside;
  if (v.enabled()) {
    v.holds("marginal-utility and deflator prices agree within 1e-8", dp.residual <= kBudgetTolerance);
    v.holds("price inside the superhedging interval", inside);
  }
}

void cmd_augment(const MarketDocument& doc, const Settings& s, Verifier& v, Outcome& o) {
  const Utility u = Utility::parse(s.utility);
  const Claim& claim = doc.claim(s.claim);
  const Augmentation a = augment_market(doc.model, u, s.wealth, claim);
  const AugmentationDiagnostics& g = a.diagnostics;
  o.report["utility"] = u.name();
  o.report["wealth"] = s.wealth;
  o.report["claim"] = claim.name();
  o.report["price"] = num(a.price);
  o.report["price_process"] = by_node(doc.model.tree(), a.price_process);
  o.report["diagnostics"] = Json{{"fair", g.fair},
                                 {"deflator_residual", num(g.deflator_residual)},
                                 {"v_before", num(g.v_before)},
                                 {"v_after", num(g.v_after)},
                                 {"u_before", num(g.u_before)},
                                 {"u_after", num(g.u_after)},
                                 {"max_deflator_change", num(g.max_deflator_change)},
                                 {"complete_before", g.complete_before},
                                 {"complete_after", g.complete_after}};
  o.report["market"] = market_to_json(a.market, doc.claims);
  o.columns.push_back({"price_process", a.price_process});
  if (v.enabled()) {
    v.holds("augmented market is fair", g.fair);
    v.agree("dual value after augmentation", g.v_before, g.v_after, kAugmentTolerance);
    v.agree("expected utility after augmentation", g.u_before, g.u_after, kAugmentTolerance);
    v.holds("minimax deflator unchanged within 1e-7", g.max_deflator_change <= kAugmentTolerance);
  }
}

void cmd_price_process(const MarketDocument& doc, const Settings& s, Verifier& v, Outcome& o) {
  const MarketModel& m = doc.model;
  const Claim& claim = doc.claim(s.claim);
  std::vector<double> deflator;
  constexpr std::string_view minimax = "minimax:";
  if (s.deflator == "witness") {
    const FairnessReport rep = check_fair(m);
    const Deflator& w = require_fair(rep);
    deflator.assign(w.values().begin(), w.values().end());
  } else if (s.deflator.rfind(minimax, 0) == 0) {
    const Utility u = Utility::parse(std::string_view(s.deflator).substr(minimax.size()));
    const DualSolution d = solve_dual(m, u, 1.0);
    deflator.assign(d.deflator.values().begin(), d.deflator.values().end());
  } else {
    throw ModelError("--deflator must be 'witness' or 'minimax:UTILITY'");
  }
  const std::vector<double> process = fair_price_process(m, deflator, claim);
  o.report["claim"] = claim.name();
  o.report["deflator_choice"] = s.deflator;
  o.report["deflator"] = by_node(m.tree(), deflator);
  o.report["price_process"] = by_node(m.tree(), process);
  o.columns.push_back({"deflator", deflator});
  o.columns.push_back({"price_process", process});
  if (v.enabled()) {
    v.holds("deflator martingale residual within 1e-9", deflator_residual(m, deflator) <= kDeflatorMartingaleTolerance);
    const PriceInterval iv = superhedge_price(m, claim);
    const double p0 = process[ScenarioTree::root()];
    v.holds("price inside the superhedging interval",
            p0 >= iv.lower - kIntervalTolerance && p0 <= iv.upper + kIntervalTolerance);
  }
}

Json tolerances_json(const Settings& s) {
  return Json{{"verify", s.tolerance},
              {"positivity", kPositivityThreshold},
              {"deflator_martingale", kDeflatorMartingaleTolerance},
              {"interval", kIntervalTolerance},
              {"supermartingale", kSupermartingaleTolerance},
              {"budget", kBudgetTolerance},
              {"consumption", kConsumptionTolerance}};
}

Outcome run_file(const Settings& s, const std::string& path) {
  Outcome o;
  o.path = path;
  o.report["command"] = s.command;
  o.report["tolerances"] = tolerances_json(s);
  o.report["seed"] = nullptr;
  Verifier v(s.verify);
  try {
    const std::string text = read_file(path);
    o.report["input"] = Json{{"path", path}, {"digest", "fnv1a64:" + fnv1a64_hex(text)}};
    const MarketDocument doc = parse_market_text(text, path);
    o.tree = doc.model.tree();
    if (s.command == "validate") cmd_validate(doc, o);
    else if (s.command == "fair") cmd_fair(doc, v, o);
    else if (s.command == "complete") cmd_complete(doc, v, o);
    else if (s.command == "superhedge") cmd_superhedge(doc, s, v, o);
    else if (s.command == "decompose") cmd_decompose(doc, s, v, o);
    else if (s.command == "optimize") cmd_optimize(doc, s, v, o);
    else if (s.command == "davis") cmd_davis(doc, s, v, o);
    else if (s.command == "augment") cmd_augment(doc, s, v, o);
    else if (s.command == "price-process") cmd_price_process(doc, s, v, o);
    v.finish(o);
  } catch (const ModelError& e) {
    o.report["error"] = e.what();
    o.code = kExitUsage;
  } catch (const SizeGuardError& e) {
    o.report["error"] = e.what();
    o.code = kExitUsage;
  } catch (const UnfairMarketError& e) {
    o.report["verdict"] = "unfair";
    o.report["error"] = e.what();
    o.code = kExitVerdict;
  } catch (const std::exception& e) {
    o.report["error"] = std::string("internal error: ") + e.what();
    o.code = kExitInternal;
  }
  return o;
}

std::string csv_cell(double v) { return std::isfinite(v) ? Json(v).dump() : std::string(); }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void write_csv(const Outcome& o, bool header, std::ostream& out) {
  if (!o.tree) return;
  const ScenarioTree& t = *o.tree;
  if (header) {
    out << "file,node,parent,time";
    for (const Column& c : o.columns) out << ',' << csv_quote(c.name);
    out << '\n';
  }
  for (NodeIndex n = 0; n < t.size(); ++n) {
    const auto p = t.parent(n);
    out << csv_quote(o.path) << ',' << csv_quote(t.id(n)) << ',' << (p ? csv_quote(t.id(*p)) : "") << ',' << t.time(n);
    for (const Column& c : o.columns) out << ',' << csv_cell(c.values[n]);
    out << '\n';
  }
}

int run_generate(const Settings& s, std::ostream& out) {
  const MarketModel m = generate_market(s.gen);
  const Claim claim = random_claim(m, s.gen.seed ^ 0x9e3779b97f4a7c15ULL);
  const Json meta{{"generator", "mt19937_64"},
                  {"seed", s.gen.seed},
                  {"depth", s.gen.depth},
                  {"branching", s.gen.branching},
                  {"assets", s.gen.assets},
                  {"arbitrage", s.gen.arbitrage}};
  if (s.format == "csv") {
    Outcome o;
    o.path = "generated";
    o.tree = m.tree();
    for (std::size_t i = 0; i < m.assets(); ++i) {
      const auto row = m.prices().row(i);
      o.columns.push_back({m.asset_name(i), {row.begin(), row.end()}});
    }
    write_csv(o, true, out);
  } else {
    out << serialize_market(m, std::span<const Claim>(&claim, 1), meta);
  }
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Pricing, hedging and utility maximisation on finite scenario-tree markets", "fairmarket"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--tolerance", s.tolerance, "Agreement tolerance for --verify checks")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verify", s.verify, "Cross-check results against brute-force oracles");
  app.add_option("--format", s.format, "Output format")->check(CLI::IsMember({"report", "csv"}));
  app.add_option("--jobs", s.jobs, "Market files processed concurrently")->check(CLI::Range(1u, 256u));

  auto files = [&](CLI::App* sub) { sub->add_option("files", s.files, "Market files")->required(); };
  auto claim = [&](CLI::App* sub) { sub->add_option("--claim", s.claim, "Claim name in the market file")->required(); };
  auto utility = [&](CLI::App* sub) {
    sub->add_option("--utility", s.utility, "log or power:P")->capture_default_str();
    sub->add_option("--wealth", s.wealth, "Initial wealth")->check(CLI::PositiveNumber)->capture_default_str();
  };

  files(app.add_subcommand("validate", "Parse and validate market files"));
  files(app.add_subcommand("fair", "Fairness verdict, witness deflator or arbitrage certificate"));
  files(app.add_subcommand("complete", "Completeness verdict and incompleteness dimension"));
  for (const char* name : {"superhedge", "decompose"}) {
    auto* sub = app.add_subcommand(name, name == std::string("superhedge")
                                             ? "Superhedging interval and attainability of a claim"
                                             : "Superhedging strategy and consumption process of a claim");
    files(sub);
    claim(sub);
  }
  {
    auto* sub = app.add_subcommand("optimize", "Expected-utility optimum by convex duality");
    files(sub);
    utility(sub);
  }
  for (const char* name : {"davis", "augment"}) {
    auto* sub = app.add_subcommand(name, name == std::string("davis")
                                             ? "Marginal-utility price of a claim"
                                             : "Add a claim at its marginal-utility price and recheck the optimum");
    files(sub);
    claim(sub);
    utility(sub);
  }
  {
    auto* sub = app.add_subcommand("price-process", "Fair price process of a claim under a chosen deflator");
    files(sub);
    claim(sub);
    sub->add_option("--deflator", s.deflator, "witness or minimax:UTILITY")->capture_default_str();
  }
  {
    auto* sub = app.add_subcommand("generate", "Random fair market file");
    sub->add_option("--seed", s.gen.seed, "64-bit seed")->required();
    sub->add_option("--depth", s.gen.depth, "Tree depth (0-6)")->check(CLI::Range(0, 6))->capture_default_str();
    sub->add_option("--branching", s.gen.branching, "Maximum children per node (1-4)")
        ->check(CLI::Range(1, 4))
        ->capture_default_str();
    sub->add_option("--assets", s.gen.assets, "Number of assets (1-5)")->check(CLI::Range(1, 5))->capture_default_str();
    sub->add_flag("--arb", s.gen.arbitrage, "Add a dominated asset");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "fairmarket: " << e.what() << "\n";
    return kExitUsage;
  }
  s.command = app.get_subcommands().front()->get_name();

  if (s.command == "generate") {
    try {
      return run_generate(s, out);
    } catch (const ModelError& e) {
      err << "fairmarket: " << e.what() << "\n";
      return kExitUsage;
    }
  }

  std::vector<Outcome> outcomes(s.files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < s.files.size(); k = next++) outcomes[k] = run_file(s, s.files[k]);
  };
  const unsigned threads = std::min<unsigned>(s.jobs, static_cast<unsigned>(s.files.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int code = kExitOk;
  for (const Outcome& o : outcomes) {
    code = std::max(code, o.code);
    if (o.report.contains("error")) err << "fairmarket: " << o.path << ": " << o.report["error"].get<std::string>() << "\n";
  }
  if (s.format == "csv") {
    for (std::size_t k = 0; k < outcomes.size(); ++k) write_csv(outcomes[k], k == 0, out);
  } else if (outcomes.size() == 1) {
    out << outcomes.front().report.dump(2) << "\n";
  } else {
    Json all = Json::array();
    for (const Outcome& o : outcomes) all.push_back(o.report);
    out << all.dump(2) << "\n";
  }
  return code;
}

}  // namespace fm
