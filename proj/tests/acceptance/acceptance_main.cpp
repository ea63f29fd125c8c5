// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "../unit/test_support.hpp"
#include "wfchain/chain_engine.hpp"
#include "wfchain/error.hpp"
#include "wfchain/experiment.hpp"
#include "wfchain/generator.hpp"
#include "wfchain/qlearning.hpp"
#include "wfchain/sdm.hpp"

using namespace wfchain;
using AT = ActionType;
using wfchain::testing::fixture;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Owns what a ChainContext points at.
struct Bench {
  Workflow w;
  SecurityDependencyMatrix sdm;
  ThreatCatalog catalog;
  ActionTable actions;
  std::vector<ChainConstraint> constraints;

  Bench(Workflow wf, ThreatCatalog cat, ServiceQuote quote)
      : w(std::move(wf)), sdm(compute_sdm(w)), catalog(std::move(cat)),
        actions(ActionTable::uniform(w, catalog, quote)) {}
  ChainContext ctx() const { return {w, sdm, catalog, actions, constraints}; }
};

Bench insurance() {
  return Bench(load_workflow(fixture("insurance_workflow.json")), ThreatCatalog::load(fixture("fixture_catalog.json")),
               {2.0, 10.0});
}

std::set<std::string> ids(const Workflow& w, const TaskSet& s) {
  std::set<std::string> out;
  for (auto t : s) out.insert(w.task(t).id);
  return out;
}

// ---- 1

Cia sdm_oracle(const wfchain::testing::RandomDag& g, const Workflow& w, int i, int j) {
  using wfchain::testing::nodes_on_paths;
  if (i == j) return {1, 1, 1};
  auto req = [&](int k) { return w.task(w.index_of("t" + std::to_string(k))).requirements; };
  auto prod = [&](const std::set<int>& nodes, double Cia::*f) {
    double p = 1.0;
    for (int k : nodes) p *= req(k).*f;
    return p;
  };
  auto fwd_data = nodes_on_paths(g.data, i, j);
  auto bwd_data = nodes_on_paths(g.data, j, i);
  auto fwd_ctrl = nodes_on_paths(g.ctrl, i, j);
  Cia out;
  if (!fwd_data.empty()) out.c = prod(fwd_data, &Cia::c);
  else if (!bwd_data.empty()) out.c = prod(bwd_data, &Cia::c);
  if (!fwd_data.empty() || !fwd_ctrl.empty()) {
    auto both = fwd_data;
    both.insert(fwd_ctrl.begin(), fwd_ctrl.end());
    out.i = prod(both, &Cia::i);
  }
  if (!fwd_data.empty()) out.a = prod(fwd_data, &Cia::a);
  return out;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240101);
  std::size_t cells = 0;
  double worst = 0.0;
  for (int round = 0; round < 200; ++round) {
    const int n = 2 + static_cast<int>(rng() % 11);
    auto g = wfchain::testing::random_dag(rng, n, 0.35, 0.6);
    auto w = parse_workflow(g.doc);
    auto m = compute_sdm(w);
    for (int t = 0; t < n; ++t) {
      TaskSet ctrl, data;
      for (int x : wfchain::testing::bfs(g.ctrl, t)) ctrl.insert(w.index_of("t" + std::to_string(x)));
      for (int x : wfchain::testing::bfs(g.data, t)) data.insert(w.index_of("t" + std::to_string(x)));
      const auto ti = w.index_of("t" + std::to_string(t));
      if (w.control_flow_closure(ti) != ctrl || w.data_flow_closure(ti) != data)
        return {false, fmt("closure mismatch on dag %d task t%d", round, t)};
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        auto ref = sdm_oracle(g, w, i, j);
        auto got = m.at("t" + std::to_string(i), "t" + std::to_string(j));
        worst = std::max({worst, std::abs(got.c - ref.c), std::abs(got.i - ref.i), std::abs(got.a - ref.a)});
        ++cells;
      }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          fmt("200 dags, %zu sdm cells, max deviation %.3g, %.2fs", cells, worst, secs)};
}

// ---- 2

Outcome criterion2() {
  auto b = insurance();
  const auto& w = b.w;
  std::vector<std::string> bad;
  if (data_flow_closure(w, "t3") != std::set<std::string>{"t5", "t6"}) bad.push_back("DFCS(t3)");
  if (control_flow_closure(w, "t3") != std::set<std::string>{"t5", "t6", "t7", "t8"}) bad.push_back("CFCS(t3)");
  if (ids(w, dependent_tasks(b.sdm, w.index_of("t5"))) != std::set<std::string>{"t3", "t4", "t5", "t6", "t8"})
    bad.push_back("DT(t5)");

  auto doc = wfchain::testing::read_fixture("insurance_constraints.json");
  for (std::size_t k = 0; k < doc.size(); ++k) b.constraints.push_back(parse_constraint(w, b.catalog, doc[k]));
  std::vector<AdaptationChain> acs;
  for (auto key : {"t5:Insert", "t1:Insert|t5:Rework", "t3:Insert|t5:Reconfiguration|t6:Rework",
                   "t1:Insert|t3:Rework|t4:Insert|t5:Insert|t6:Rework"})
    acs.push_back(parse_chain_key(w, b.catalog, key));
  auto rac = resolve_constraints(acs, b.constraints, {}, w.size());
  if (rac.size() != 3 || rac[0] != acs[0] || rac[1] != acs[1] || rac[2] != acs[2]) bad.push_back("constraint removal");

  auto acl = expand_chain_loop(w, w.index_of("t5"), parse_chain_key(w, b.catalog, "t1:Insert|t5:Rework"));
  const auto* r3 = acl.step_for(w.index_of("t3"));
  const auto* r4 = acl.step_for(w.index_of("t4"));
  if (acl.key(w) != "t1:Insert|t3:Rework|t4:Rework|t5:Rework" || !r3 || !r3->unintentional || !r4 ||
      !r4->unintentional)
    bad.push_back("loop expansion");

  std::string detail = bad.empty() ? "closures, DT(t5), constraint removal, loop expansion" : "mismatch:";
  for (const auto& x : bad) detail += " " + x;
  return {bad.empty(), detail};
}

// ---- 3

Outcome criterion3() {
  auto b = insurance();
  const Violation v{b.w.index_of("t5"), "DoS", Severity::High};
  std::string shape;
  for (auto t : dependent_tasks(b.sdm, v.vt)) shape += std::to_string(feasible_actions(b.w.task(t), b.catalog, v.attack, v.severity).size());
  const auto t0 = std::chrono::steady_clock::now();
  auto set = generate_chain_set(b.w, b.sdm, b.catalog, v);
  const double secs = seconds_since(t0);
  return {set.chains.size() == 1279 && !set.truncated && shape == "33433" && secs < 1.0,
          fmt("shape k=%s, %zu nonempty chains, %.4fs", shape.c_str(), set.chains.size(), secs)};
}

// ---- 4

Outcome criterion4() {
  const auto& c = ThreatCatalog::builtin();
  int cells = 0, bad = 0;
  auto check = [&](bool ok) {
    ++cells;
    if (!ok) ++bad;
  };
  const std::map<std::string, Cia> impact{{"DoS", {0.56, 0.56, 0.56}},
                                          {"Probe", {0.22, 0.22, 0.0}},
                                          {"U2R", {0.56, 0.22, 0.22}},
                                          {"R2L", {0.56, 0.56, 0.22}}};
  for (const auto& [a, cia] : impact) check(attack_impact(c, a) == cia);
  const std::map<std::string, std::array<ActionSet, 3>> mitig{
      {"DoS", {ActionSet{AT::Switch, AT::Rework}, ActionSet{AT::Insert, AT::Rework},
               ActionSet{AT::Insert, AT::Rework, AT::Redundancy, AT::Reconfiguration}}},
      {"Probe", {ActionSet{AT::Skip}, ActionSet{AT::Skip, AT::Reconfiguration}, ActionSet{AT::Skip, AT::Reconfiguration}}},
      {"U2R", {ActionSet{AT::Insert, AT::Rework}, ActionSet{AT::Insert, AT::Rework},
               ActionSet{AT::Insert, AT::Rework, AT::Redundancy, AT::Reconfiguration}}},
      {"R2L", {ActionSet{AT::Rework}, ActionSet{AT::Insert, AT::Rework},
               ActionSet{AT::Insert, AT::Rework, AT::Reconfiguration}}}};
  for (const auto& [a, sets] : mitig)
    for (auto s : {Severity::Low, Severity::Medium, Severity::High})
      check(mitigation_actions_for(c, a, s) == sets[static_cast<std::size_t>(s)]);
  const std::map<AT, Cia> mi{{AT::Insert, {0.7, 0.9, 0.9}},  {AT::Switch, {0.7, 0.6, 0.8}},
                             {AT::Skip, {0.5, 0.4, 0.6}},    {AT::Rework, {0.5, 0.9, 0.7}},
                             {AT::Redundancy, {0.5, 0.8, 0.9}}, {AT::Reconfiguration, {0.6, 0.7, 0.5}}};
  TaskSpec t;
  t.id = "t";
  t.requirements = {0.5, 0.5, 0.5};
  t.value = 10.0;
  t.feasible_actions = ActionSet{AT::Insert, AT::Switch, AT::Skip, AT::Rework, AT::Redundancy, AT::Reconfiguration};
  const BindingContext bind{{4.0, 20.0}, ServiceQuote{3.0, 30.0}, {}};
  for (const auto& [a, cia] : mi) {
    check(c.action(a).mitigation_impact == cia);
    check(adaptation_properties(c, a, t, bind).mitigation_impact == cia);
  }
  return {bad == 0, fmt("%d cells checked, %d mismatched", cells, bad)};
}

// ---- 5

const std::array<std::string, 4> kAttacks{"DoS", "Probe", "U2R", "R2L"};

Outcome criterion5() {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int scenarios = 0, attempts = 0, infeasible = 0;
  std::size_t chains_seen = 0;
  while (scenarios < 100) {
    if (++attempts > 5000) return {false, "could not draw 100 scenarios"};
    const int n = 3 + static_cast<int>(rng() % 6);
    auto g = wfchain::testing::random_dag(rng, n, 0.4, 0.6);
    for (auto& jt : g.doc["tasks"]) {
      jt["value"] = 1.0 + std::round(u(rng) * 490.0) / 10.0;
      auto acts = nlohmann::json::array();
      for (auto a : {"Insert", "Switch", "Skip", "Rework", "Redundancy", "Reconfiguration"})
        if (u(rng) < 0.5) acts.push_back(a);
      if (acts.empty()) acts.push_back("Rework");
      jt["actions"] = acts;
    }
    Bench b(parse_workflow(g.doc), ThreatCatalog::builtin(), {0.1 + u(rng) * 9.9, 1.0 + u(rng) * 49.0});
    const Violation v{static_cast<TaskIndex>(rng() % n), kAttacks[rng() % 4],
                      static_cast<Severity>(rng() % 3)};
    const auto dt = dependent_tasks(b.sdm, v.vt);
    if (dt.size() > 5) continue;
    const Weights wts{u(rng) * 5, u(rng) * 5, u(rng) * 5, u(rng) * 10};
    // one random conflict between two dependent tasks
    if (dt.size() >= 2 && u(rng) < 0.5) {
      std::vector<TaskIndex> d(dt.begin(), dt.end());
      ChainConstraint cc;
      cc.left_task = d[rng() % d.size()];
      cc.right_task = d[rng() % d.size()];
      cc.left_action = static_cast<AT>(rng() % 6);
      cc.right_action = static_cast<AT>(rng() % 6);
      b.constraints.push_back(cc);
    }

    // independent enumeration: every nonempty combination, then loop expansion
    std::vector<std::pair<TaskIndex, std::vector<AT>>> per;
    for (auto t : dt) {
      std::vector<AT> acts;
      b.w.task(t).feasible_actions.for_each([&](AT a) {
        if (mitigation_actions_for(b.catalog, v.attack, v.severity).contains(a)) acts.push_back(a);
      });
      per.push_back({t, acts});
    }
    std::map<std::string, AdaptationChain> all;
    std::vector<ChainStep> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == per.size()) {
        if (cur.empty()) return;
        auto ac = expand_chain_loop(b.w, v.vt, make_chain(b.w, cur));
        all.emplace(ac.key(b.w), ac);
        return;
      }
      rec(k + 1);
      for (auto a : per[k].second) {
        cur.push_back({per[k].first, a, false});
        rec(k + 1);
        cur.pop_back();
      }
    };
    rec(0);

    double best_ref = std::numeric_limits<double>::infinity();
    for (const auto& [_, ac] : all) best_ref = std::min(best_ref, chain_cost(b.ctx(), ac, {}, wts, v).total);

    RankedChain best;
    try {
      best = optimal_chain_exhaustive(b.ctx(), v, {}, wts);
    } catch (const NoFeasibleChainError&) {
      if (!std::isinf(best_ref)) return {false, fmt("oracle found nothing on scenario %d", scenarios)};
      ++infeasible;
      continue;
    }
    chains_seen += all.size();
    if (best.cost.total != best_ref || !all.contains(best.chain.key(b.w)))
      return {false, fmt("scenario %d: oracle %.17g vs re-scan %.17g", scenarios, best.cost.total, best_ref)};
    for (double k : {0.25, 3.0, 1000.0}) {
      auto scaled = optimal_chain_exhaustive(b.ctx(), v, {}, wts.scaled(k));
      const double at_base = chain_cost(b.ctx(), scaled.chain, {}, wts, v).total;
      // same chain, or a chain tied with it at the base weights
      if (scaled.chain.key(b.w) != best.chain.key(b.w) && at_base != best.cost.total)
        return {false, fmt("scenario %d: argmin moved under scale %g", scenarios, k)};
    }
    ++scenarios;
  }
  return {true, fmt("100 scenarios, %zu chains re-scanned, %d skipped with no feasible chain", chains_seen,
                    infeasible)};
}

// ---- 6

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  auto s = load_scenario(fixture("line_scenario.json"));
  Simulator sim(s);
  const Violation v{s.workflow.index_of("c"), "DoS", Severity::High};
  const auto cands = candidate_chains(sim.context(), v, {});
  const auto best = optimal_chain_exhaustive(sim.context(), v, {}, s.tenant.weights).chain.key(s.workflow);
  RLConfig cfg;
  cfg.episodes = 2000;
  int states = 0, agree = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto r = train(s, cfg, seed, s.tenant.weights);
    QResponder greedy(r.table, s.workflow);
    auto trace = sim.execute(0, sim.schedule(0, 0, 0.0), &greedy, s.tenant.weights);
    for (const auto& ev : trace.violations) {
      ++states;
      if (ev.chain == best) ++agree;
    }
  }
  const double secs = seconds_since(t0);
  const double share = states ? double(agree) / states : 0.0;
  return {cands.chains.size() <= 30 && share >= 0.95 && secs < 60.0,
          fmt("%zu candidates, greedy = oracle (%s) in %d/%d states, %.2fs", cands.chains.size(), best.c_str(),
              agree, states, secs)};
}

// ---- 7 and 8

struct Replication {
  std::string csv;
  std::string rolling;
  std::string tables;
  MetricsReport r1117, r3331;
};

Replication replicate() {
  auto s = generate_scenario({10, 5, 3, 1});
  Replication out;
  const auto dir = std::filesystem::temp_directory_path() / "wfchain_acceptance";
  std::filesystem::create_directories(dir);
  for (auto w : {Weights{1, 1, 1, 7}, Weights{3, 3, 3, 1}}) {
    RLConfig rl;
    rl.episodes = 3000;
    auto trained = train(s, rl, 7, w);
    ExperimentConfig ec;
    ec.strategies = {Strategy::Single, Strategy::Chain};
    ec.executions = 1000;
    ec.attack_rate = 0.3;
    ec.weights = w;
    ec.master_seed = 42;
    auto rep = run_experiment(s, ec, &trained.table);
    const auto path = (dir / "metrics.csv").string();
    export_metrics(rep, path);
    out.csv += slurp(path);
    out.rolling += slurp(rolling_path_for(path));
    out.tables += trained.table.to_json(s.workflow).dump();
    (w.mitigation == 7 ? out.r1117 : out.r3331) = std::move(rep);
  }
  return out;
}

Outcome criterion7(const Replication& r, double secs) {
  const auto* c1 = r.r1117.find("chain");
  const auto* s1 = r.r1117.find("single");
  const auto* c3 = r.r3331.find("chain");
  const auto* s3 = r.r3331.find("single");
  const bool ok = c1->mean_total < s1->mean_total && c3->mean_total < s3->mean_total &&
                  c1->mean_ms >= c3->mean_ms && secs < 300.0;
  return {ok, fmt("1-1-1-7 chain %.3f < single %.3f; 3-3-3-1 chain %.3f < single %.3f; MS %.4f >= %.4f; %.2fs",
                  c1->mean_total, s1->mean_total, c3->mean_total, s3->mean_total, c1->mean_ms, c3->mean_ms, secs)};
}

Outcome criterion8(const Replication& a) {
  auto b = replicate();
  const bool ok = a.csv == b.csv && a.rolling == b.rolling && a.tables == b.tables;
  return {ok, fmt("metrics %zu bytes, rolling %zu bytes, q-tables %zu bytes %s", a.csv.size(), a.rolling.size(),
                  a.tables.size(), ok ? "identical" : "differ")};
}

// ---- 9

Outcome criterion9() {
  RLConfig cfg;
  cfg.alpha = 0.5;
  cfg.gamma = 0.9;
  const RLState st{0, "DoS", Severity::High, {}};
  QTable once(0.0);
  const double first = q_update(once, st, "s", "c", 10.0, std::nullopt, cfg);

  QTable q(0.0);
  const double r = -3.75;
  double v = 0.0;
  int iters = 0;
  while (std::abs(v - r) >= 1e-6 && iters < 50) {
    v = q_update(q, st, "s", "c", r, std::nullopt, cfg);
    ++iters;
  }
  const bool ok = first == 5.0 && std::abs(v - r) < 1e-6;
  return {ok, fmt("first update %.17g, reached r=%.2f within 1e-6 after %d iterations", first, r, iters)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.ok) ++failed;
    std::printf("%s criterion %d: %s (%s)\n", o.ok ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "closure and dependency matrix oracles", criterion1);
  report(2, "insurance workflow golden values", criterion2);
  report(3, "enumeration count", criterion3);
  report(4, "catalog fidelity", criterion4);
  report(5, "cost oracle and weight scaling", criterion5);
  report(6, "learned policy matches oracle", criterion6);

  Replication first;
  double secs = 0.0;
  bool have = false;
  report(7, "chain beats single on generated workflow", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    first = replicate();
    secs = seconds_since(t0);
    have = true;
    return criterion7(first, secs);
  });
  report(8, "determinism under fixed master seed", [&] {
    if (!have) return Outcome{false, "criterion 7 run did not complete"};
    return criterion8(first);
  });
  report(9, "update rule fixed point", criterion9);
  return failed == 0 ? 0 : 1;
}
