#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "wfchain/chain_engine.hpp"
#include "wfchain/error.hpp"
#include "wfchain/experiment.hpp"
#include "wfchain/generator.hpp"
#include "wfchain/qlearning.hpp"
#include "wfchain/scenario.hpp"
#include "wfchain/sdm.hpp"
#include "wfchain/simulator.hpp"
#include "wfchain/workflow.hpp"

using namespace wfchain;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfig = 2;
constexpr int kValidation = 3;

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path));
  out << text;
}

Weights weights_option(const std::string& text, const Weights& fallback) {
  if (text.empty()) return fallback;
  try {
    return parse_weights(text);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

int cmd_gen(std::size_t tasks, std::size_t providers, std::size_t services, std::uint64_t seed,
            const std::string& out) {
  auto s = generate_scenario({tasks, providers, services, seed});
  write_or_print(out, to_json(s).dump(1) + "\n");
  return kOk;
}

int cmd_sdm(const std::string& workflow, const std::string& scenario, const std::string& out) {
  if (workflow.empty() == scenario.empty()) throw ConfigError("sdm: give exactly one of --workflow or --scenario");
  if (!workflow.empty()) {
    write_or_print(out, compute_sdm(load_workflow(workflow)).to_csv());
  } else {
    write_or_print(out, compute_sdm(load_scenario(scenario).workflow).to_csv());
  }
  return kOk;
}

int cmd_train(const std::string& scenario, std::optional<std::size_t> episodes, const std::string& rl_path,
              std::uint64_t seed, const std::string& weights, const std::string& out, const std::string& log) {
  auto s = load_scenario(scenario);
  RLConfig cfg = rl_path.empty() ? RLConfig{} : load_rl_config(rl_path);
  if (episodes) cfg.episodes = *episodes;
  auto res = train(s, cfg, seed, weights_option(weights, s.tenant.weights));
  if (out.empty()) throw ConfigError("train: -o is required");
  res.table.save(out, s.workflow);
  if (!log.empty()) write_train_log(log, res.log);
  std::fprintf(stderr, "trained %zu episodes, %zu entries\n", cfg.episodes, res.table.size());
  return kOk;
}

int cmd_run(const std::string& scenario, const std::vector<std::string>& strategies, const std::string& qtable,
            std::size_t executions, double rate, const std::string& weights, std::uint64_t seed,
            const std::string& out, const std::string& traces) {
  auto s = load_scenario(scenario);
  ExperimentConfig cfg;
  cfg.strategies.clear();
  for (const auto& name : strategies) {
    std::stringstream ss(name);
    std::string part;
    while (std::getline(ss, part, ',')) cfg.strategies.push_back(parse_strategy(part));
  }
  cfg.executions = executions;
  cfg.attack_rate = rate;
  cfg.weights = weights_option(weights, s.tenant.weights);
  cfg.master_seed = seed;
  cfg.traces_path = traces;
  std::optional<QTable> q;
  if (!qtable.empty()) q = QTable::load(qtable, s.workflow);
  auto report = run_experiment(s, cfg, q ? &*q : nullptr);
  if (out.empty() || out == "-") {
    std::cout << metrics_csv(report);
  } else {
    export_metrics(report, out);
  }
  return kOk;
}

int cmd_oracle(const std::string& scenario, const std::string& vt, const std::string& attack,
               const std::string& severity, std::size_t top, const std::string& weights) {
  auto s = load_scenario(scenario);
  const auto& w = s.workflow;
  if (!w.contains(vt)) throw ValidationError(fmt::format("unknown task '{}'", vt));
  if (!s.catalog.has_attack(attack)) throw ValidationError(fmt::format("unknown attack type '{}'", attack));
  auto sev = parse_severity(severity);
  if (!sev) throw ConfigError(fmt::format("unknown severity '{}'", severity));
  Simulator sim(s);
  const Violation v{w.index_of(vt), attack, *sev};
  const auto ctx = sim.context();
  const auto wt = weights_option(weights, s.tenant.weights);
  AdaptationHistory history;
  auto cands = candidate_chains(ctx, v, history, s.limits);
  auto ranked = rank_chains(ctx, cands.chains, history, wt, v);
  std::cout << "rank,chain,total,price,time,value,ms\n";
  for (std::size_t k = 0; k < std::min(top, ranked.size()); ++k) {
    const auto& r = ranked[k];
    std::cout << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", k + 1, r.chain.key(w), r.cost.total,
                             r.cost.price, r.cost.time, r.cost.value, r.cost.mitigation_score);
  }
  if (cands.truncated) std::fprintf(stderr, "note: candidate set truncated, ranking is partial\n");
  if (ranked.empty()) std::fprintf(stderr, "no feasible chain\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptation chain engine for multi-cloud workflows"};
  app.require_subcommand(1);

  std::size_t tasks = 10, providers = 5, services = 3;
  std::uint64_t seed = 0;
  std::string out;
  auto* gen = app.add_subcommand("gen", "generate a random scenario");
  gen->add_option("--tasks", tasks, "number of tasks");
  gen->add_option("--providers", providers, "number of providers");
  gen->add_option("--services", services, "services per provider");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("-o,--out", out, "output file (stdout when absent)");

  std::string workflow, scenario;
  auto* sdm = app.add_subcommand("sdm", "print the security dependency matrix as CSV");
  sdm->add_option("--workflow", workflow, "workflow JSON");
  sdm->add_option("--scenario", scenario, "scenario JSON");
  sdm->add_option("-o,--out", out, "output file");

  std::optional<std::size_t> episodes;
  std::string rl, weights, log;
  auto* tr = app.add_subcommand("train", "train a Q-table against the simulator");
  tr->add_option("--scenario", scenario, "scenario JSON")->required();
  tr->add_option("--episodes", episodes, "training episodes (overrides the RL config)");
  tr->add_option("--rl", rl, "RL config JSON");
  tr->add_option("--seed", seed, "training seed");
  tr->add_option("--weights", weights, "cost weights p,t,v,ms");
  tr->add_option("-o,--out", out, "Q-table output")->required();
  tr->add_option("--log", log, "training log CSV");

  std::vector<std::string> strategies{"single"};
  std::string qtable, traces;
  std::size_t executions = 1000;
  double rate = 0.3;
  bool full_scale = false;
  auto* run = app.add_subcommand("run", "run paired executions and write metrics");
  run->add_option("--scenario", scenario, "scenario JSON")->required();
  run->add_option("--strategy", strategies, "none|single|chain|oracle, repeatable or comma separated");
  run->add_option("--qtable", qtable, "trained Q-table for the chain strategy");
  run->add_option("--executions", executions, "executions per strategy");
  run->add_flag("--full", full_scale, "10000 executions");
  run->add_option("--attack-rate", rate, "attack rate in [0,1]");
  run->add_option("--weights", weights, "cost weights p,t,v,ms");
  run->add_option("--seed", seed, "master seed");
  run->add_option("-o,--out", out, "metrics CSV (stdout when absent)");
  run->add_option("--traces", traces, "JSON-lines trace output");

  std::string vt, attack, severity = "High";
  std::size_t top = 10;
  auto* orc = app.add_subcommand("oracle", "rank candidate chains for one violation");
  orc->add_option("--scenario", scenario, "scenario JSON")->required();
  orc->add_option("--vt", vt, "violated task id")->required();
  orc->add_option("--attack", attack, "attack type")->required();
  orc->add_option("--severity", severity, "Low|Medium|High");
  orc->add_option("--top", top, "rows to print");
  orc->add_option("--weights", weights, "cost weights p,t,v,ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_gen(tasks, providers, services, seed, out);
    if (*sdm) return cmd_sdm(workflow, scenario, out);
    if (*tr) return cmd_train(scenario, episodes, rl, seed, weights, out, log);
    if (*run) return cmd_run(scenario, strategies, qtable, full_scale ? 10000 : executions, rate, weights, seed, out,
                             traces);
    if (*orc) return cmd_oracle(scenario, vt, attack, severity, top, weights);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kConfig;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kValidation;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kValidation;
  } catch (const CatalogError& e) {
    std::fprintf(stderr, "catalog error: %s\n", e.what());
    return kValidation;
  } catch (const BindingError& e) {
    std::fprintf(stderr, "binding error: %s\n", e.what());
    return kValidation;
  } catch (const LookupError& e) {
    std::fprintf(stderr, "lookup error: %s\n", e.what());
    return kValidation;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}
