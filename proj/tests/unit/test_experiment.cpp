#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "test_support.hpp"
#include "wfchain/error.hpp"
#include "wfchain/experiment.hpp"
#include "wfchain/generator.hpp"

using namespace wfchain;
using wfchain::testing::fixture;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Experiment, SingleCleanExecution) {
  auto s = load_scenario(fixture("insurance_scenario.json"));
  ExperimentConfig cfg;
  cfg.strategies = {Strategy::None};
  cfg.executions = 1;
  cfg.attack_rate = 0.0;
  auto rep = run_experiment(s, cfg);
  Simulator sim(s);
  auto t = sim.execute(0, {}, nullptr, s.tenant.weights);
  ASSERT_EQ(rep.rows.size(), 1u);
  const auto& r = rep.rows[0];
  EXPECT_EQ(r.mean_total, t.totals.total);
  EXPECT_EQ(r.mean_time, t.totals.time);
  EXPECT_EQ(r.mean_price, t.totals.price);
  EXPECT_EQ(r.mean_value, t.totals.value);
  EXPECT_EQ(r.std_total, 0.0);
  EXPECT_EQ(r.violations, 0u);
}

TEST(Experiment, PairedSchedules) {
  auto s = generate_scenario({10, 5, 3, 2});
  ExperimentConfig cfg;
  cfg.strategies = {Strategy::None, Strategy::Single, Strategy::Oracle};
  cfg.executions = 200;
  auto rep = run_experiment(s, cfg);
  EXPECT_GT(rep.rows[0].violations, 0u);
  EXPECT_EQ(rep.rows[0].violations, rep.rows[1].violations);
  EXPECT_EQ(rep.rows[0].violations, rep.rows[2].violations);
  EXPECT_EQ(rep.rows[0].chains_applied, 0u);
}

TEST(Experiment, ChainNeedsTable) {
  auto s = load_scenario(fixture("insurance_scenario.json"));
  ExperimentConfig cfg;
  cfg.strategies = {Strategy::Chain};
  EXPECT_THROW(run_experiment(s, cfg), ConfigError);
}

TEST(Experiment, BadConfig) {
  auto s = load_scenario(fixture("insurance_scenario.json"));
  ExperimentConfig cfg;
  cfg.executions = 0;
  EXPECT_THROW(run_experiment(s, cfg), ConfigError);
  cfg.executions = 1;
  cfg.attack_rate = 1.5;
  EXPECT_THROW(run_experiment(s, cfg), ConfigError);
}

TEST(Experiment, ChainBeatsSingleOnDominanceFixture) {
  auto s = load_scenario(fixture("dominance_scenario.json"));
  RLConfig rl;
  rl.episodes = 500;
  auto trained = train(s, rl, 1, s.tenant.weights);
  ExperimentConfig cfg;
  cfg.strategies = {Strategy::Single, Strategy::Chain};
  cfg.executions = 20;
  auto rep = run_experiment(s, cfg, &trained.table);
  EXPECT_LT(rep.find("chain")->mean_total, rep.find("single")->mean_total);
}

TEST(Experiment, MeansMatchExportedTraces) {
  auto s = generate_scenario({10, 5, 3, 5});
  ExperimentConfig cfg;
  cfg.strategies = {Strategy::Single, Strategy::Oracle};
  cfg.executions = 150;
  cfg.traces_path = ::testing::TempDir() + "traces.jsonl";
  auto rep = run_experiment(s, cfg);
  std::ifstream in(cfg.traces_path);
  std::map<std::string, std::pair<double, std::size_t>> sums;
  std::string line;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    auto& acc = sums[j["strategy"].get<std::string>()];
    acc.first += j["totals"]["total"].get<double>();
    acc.second += 1;
  }
  for (const auto& r : rep.rows) {
    ASSERT_EQ(sums[r.strategy].second, 150u);
    EXPECT_NEAR(sums[r.strategy].first / 150.0, r.mean_total, 1e-9);
  }
}

TEST(Metrics, EmptyReportIsHeaderOnly) {
  const auto path = ::testing::TempDir() + "empty_metrics.csv";
  export_metrics({}, path);
  EXPECT_EQ(slurp(path),
            "strategy,executions,mean_time,mean_price,mean_value,mean_ms,mean_total,std_total,violations,"
            "chains_applied\n");
}

TEST(Metrics, CsvRoundTrip) {
  auto s = generate_scenario({10, 5, 3, 9});
  ExperimentConfig cfg;
  cfg.strategies = {Strategy::None, Strategy::Single};
  cfg.executions = 60;
  auto rep = run_experiment(s, cfg);
  const auto path = ::testing::TempDir() + "metrics.csv";
  export_metrics(rep, path);
  auto back = parse_metrics_csv(slurp(path));
  ASSERT_EQ(back.rows.size(), rep.rows.size());
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const auto &a = rep.rows[k], &b = back.rows[k];
    EXPECT_EQ(a.strategy, b.strategy);
    EXPECT_EQ(a.executions, b.executions);
    EXPECT_NEAR(a.mean_time, b.mean_time, 1e-9);
    EXPECT_NEAR(a.mean_price, b.mean_price, 1e-9);
    EXPECT_NEAR(a.mean_value, b.mean_value, 1e-9);
    EXPECT_NEAR(a.mean_ms, b.mean_ms, 1e-9);
    EXPECT_NEAR(a.mean_total, b.mean_total, 1e-9);
    EXPECT_NEAR(a.std_total, b.std_total, 1e-9);
    EXPECT_EQ(a.violations, b.violations);
    EXPECT_EQ(a.chains_applied, b.chains_applied);
  }
  EXPECT_THROW(parse_metrics_csv("h\nsingle,1,2\n"), ParseError);
}

TEST(Metrics, RollingRowsPerThousand) {
  auto s = load_scenario(fixture("line_scenario.json"));
  RLConfig rl;
  rl.episodes = 50;
  auto trained = train(s, rl, 2, s.tenant.weights);
  ExperimentConfig cfg;
  cfg.strategies = {Strategy::Single, Strategy::Chain};
  cfg.executions = 2500;
  auto rep = run_experiment(s, cfg, &trained.table);
  EXPECT_TRUE(rep.find("single")->rolling.empty());
  const auto& rows = rep.find("chain")->rolling;
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].first, 2000u);
  EXPECT_EQ(rows[2].count, 500u);
  const auto path = ::testing::TempDir() + "rolling.csv";
  export_metrics(rep, path);
  auto j = nlohmann::json::parse(slurp(rolling_path_for(path)));
  EXPECT_EQ(j["chain"].size(), 3u);
}
