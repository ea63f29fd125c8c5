#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wfchain/qlearning.hpp"
#include "wfchain/scenario.hpp"
#include "wfchain/simulator.hpp"

namespace wfchain {

struct ExperimentConfig {
  std::vector<Strategy> strategies{Strategy::Single};
  std::size_t executions = 1000;
  double attack_rate = 0.3;
  std::optional<Weights> weights;  // tenant weights when absent
  std::uint64_t master_seed = 0;
  std::size_t rolling_window = 1000;
  std::string traces_path;  // JSON-lines, one instance per line; empty to skip

  void validate() const;  // ConfigError
};

struct RollingRow {
  std::size_t first = 0;  // instance index of the window start
  std::size_t count = 0;
  double mean_time = 0.0;
  double mean_price = 0.0;
  double mean_value = 0.0;
  double mean_ms = 0.0;
  double mean_total = 0.0;
};

struct StrategyMetrics {
  std::string strategy;
  std::size_t executions = 0;
  double mean_time = 0.0;
  double mean_price = 0.0;
  double mean_value = 0.0;
  double mean_ms = 0.0;
  double mean_total = 0.0;
  double std_time = 0.0;
  double std_price = 0.0;
  double std_value = 0.0;
  double std_ms = 0.0;
  double std_total = 0.0;
  std::size_t violations = 0;
  std::size_t chains_applied = 0;
  std::vector<RollingRow> rolling;  // chain strategy only
};

struct MetricsReport {
  std::vector<StrategyMetrics> rows;
  const StrategyMetrics* find(std::string_view strategy) const;
};

// Aggregates totals in instance order.
StrategyMetrics aggregate(std::string strategy, std::span<const ExecutionTrace> traces, std::size_t window,
                          bool rolling);

// Runs every strategy on the same per-instance violation schedules. The chain
// strategy needs `qtable`; ConfigError otherwise.
MetricsReport run_experiment(const Scenario& s, const ExperimentConfig& cfg, const QTable* qtable = nullptr);

// CSV at `path`; rolling means next to it as <stem>.rolling.json.
void export_metrics(const MetricsReport& report, const std::string& path);
std::string metrics_csv(const MetricsReport& report);
std::string rolling_path_for(const std::string& csv_path);
MetricsReport parse_metrics_csv(std::string_view text);

}  // namespace wfchain
