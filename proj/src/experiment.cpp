#include "wfchain/experiment.hpp"

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "json_util.hpp"
#include "wfchain/error.hpp"

namespace wfchain {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (executions < 1) throw ConfigError("executions must be at least 1");
  if (!(attack_rate >= 0.0 && attack_rate <= 1.0)) throw ConfigError("attack rate must lie in [0,1]");
  if (weights && !weights->valid()) throw ConfigError("weights must be nonnegative");
  if (strategies.empty()) throw ConfigError("no strategy given");
  if (rolling_window < 1) throw ConfigError("rolling window must be positive");
}

const StrategyMetrics* MetricsReport::find(std::string_view strategy) const {
  for (const auto& r : rows)
    if (r.strategy == strategy) return &r;
  return nullptr;
}

namespace {

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / double(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / double(xs.size());
}

}  // namespace

StrategyMetrics aggregate(std::string strategy, std::span<const ExecutionTrace> traces, std::size_t window,
                          bool rolling) {
  StrategyMetrics m;
  m.strategy = std::move(strategy);
  m.executions = traces.size();
  std::vector<double> time, price, value, ms, total;
  for (const auto& t : traces) {
    time.push_back(t.totals.time);
    price.push_back(t.totals.price);
    value.push_back(t.totals.value);
    ms.push_back(t.totals.mitigation_score);
    total.push_back(t.totals.total);
    m.violations += t.violations.size();
    m.chains_applied += t.chains_applied;
  }
  m.mean_time = mean_of(time);
  m.mean_price = mean_of(price);
  m.mean_value = mean_of(value);
  m.mean_ms = mean_of(ms);
  m.mean_total = mean_of(total);
  m.std_time = sample_std(time, m.mean_time);
  m.std_price = sample_std(price, m.mean_price);
  m.std_value = sample_std(value, m.mean_value);
  m.std_ms = sample_std(ms, m.mean_ms);
  m.std_total = sample_std(total, m.mean_total);
  if (rolling) {
    for (std::size_t first = 0; first < traces.size(); first += window) {
      const std::size_t last = std::min(traces.size(), first + window);
      auto slice = [&](const std::vector<double>& xs) {
        return mean_of(std::vector<double>(xs.begin() + first, xs.begin() + last));
      };
      m.rolling.push_back({first, last - first, slice(time), slice(price), slice(value), slice(ms), slice(total)});
    }
  }
  return m;
}

MetricsReport run_experiment(const Scenario& s, const ExperimentConfig& cfg, const QTable* qtable) {
  cfg.validate();
  const Weights weights = cfg.weights.value_or(s.tenant.weights);
  Simulator sim(s);

  std::unique_ptr<std::ofstream> traces;
  if (!cfg.traces_path.empty()) {
    traces = std::make_unique<std::ofstream>(cfg.traces_path, std::ios::binary);
    if (!*traces) throw IoError(fmt::format("cannot write '{}'", cfg.traces_path));
  }

  MetricsReport report;
  for (auto strategy : cfg.strategies) {
    std::unique_ptr<Responder> responder;
    switch (strategy) {
      case Strategy::None: break;
      case Strategy::Single: responder = std::make_unique<ArgminResponder>(true); break;
      case Strategy::Oracle: responder = std::make_unique<ArgminResponder>(false); break;
      case Strategy::Chain:
        if (!qtable) throw ConfigError("strategy 'chain' needs a trained Q-table");
        responder = std::make_unique<QResponder>(*qtable, s.workflow);
        break;
    }
    std::vector<ExecutionTrace> runs;
    runs.reserve(cfg.executions);
    for (std::size_t i = 0; i < cfg.executions; ++i) {
      runs.push_back(sim.execute(i, sim.schedule(cfg.master_seed, i, cfg.attack_rate), responder.get(), weights));
      if (traces) {
        auto j = to_json(s.workflow, runs.back());
        j["strategy"] = std::string(to_string(strategy));
        *traces << j.dump() << '\n';
      }
    }
    report.rows.push_back(aggregate(std::string(to_string(strategy)), runs, cfg.rolling_window,
                                    strategy == Strategy::Chain));
  }
  if (traces && !*traces) throw IoError(fmt::format("write to '{}' failed", cfg.traces_path));
  return report;
}

std::string metrics_csv(const MetricsReport& report) {
  std::string out = "strategy,executions,mean_time,mean_price,mean_value,mean_ms,mean_total,std_total,violations,chains_applied\n";
  for (const auto& r : report.rows)
    out += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", r.strategy, r.executions,
                       r.mean_time, r.mean_price, r.mean_value, r.mean_ms, r.mean_total, r.std_total, r.violations,
                       r.chains_applied);
  return out;
}

std::string rolling_path_for(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  return (p.parent_path() / (p.stem().string() + ".rolling.json")).string();
}

void export_metrics(const MetricsReport& report, const std::string& path) {
  detail::write_text_file(path, metrics_csv(report));
  json roll = json::object();
  for (const auto& r : report.rows) {
    if (r.rolling.empty()) continue;
    json rows = json::array();
    for (const auto& w : r.rolling)
      rows.push_back({{"first", w.first},
                      {"count", w.count},
                      {"mean_time", w.mean_time},
                      {"mean_price", w.mean_price},
                      {"mean_value", w.mean_value},
                      {"mean_ms", w.mean_ms},
                      {"mean_total", w.mean_total}});
    roll[r.strategy] = rows;
  }
  detail::write_text_file(rolling_path_for(path), roll.dump(1) + "\n");
}

MetricsReport parse_metrics_csv(std::string_view text) {
  MetricsReport rep;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("metrics csv: missing header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw ParseError(fmt::format("metrics csv line {}: expected 10 fields", lineno));
    try {
      StrategyMetrics m;
      m.strategy = f[0];
      m.executions = std::stoull(f[1]);
      m.mean_time = std::stod(f[2]);
      m.mean_price = std::stod(f[3]);
      m.mean_value = std::stod(f[4]);
      m.mean_ms = std::stod(f[5]);
      m.mean_total = std::stod(f[6]);
      m.std_total = std::stod(f[7]);
      m.violations = std::stoull(f[8]);
      m.chains_applied = std::stoull(f[9]);
      rep.rows.push_back(std::move(m));
    } catch (const std::logic_error&) {
      throw ParseError(fmt::format("metrics csv line {}: bad number", lineno));
    }
  }
  return rep;
}

}  // namespace wfchain
