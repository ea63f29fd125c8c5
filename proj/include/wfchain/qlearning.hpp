#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wfchain/rng.hpp"
#include "wfchain/scenario.hpp"
#include "wfchain/simulator.hpp"

namespace wfchain {

enum class Abstraction { Compact, Full };
Abstraction parse_abstraction(std::string_view name);  // ConfigError
std::string_view to_string(Abstraction a);

struct RLState {
  TaskIndex vt = 0;
  std::string attack;
  Severity severity = Severity::Low;
  std::vector<char> mask;  // empty under the compact abstraction

  // "t5|DoS|High", with "|0010..." appended for the full abstraction.
  std::string key(const Workflow& w) const;
  friend bool operator==(const RLState&, const RLState&) = default;
};

RLState encode_state(const Violation& v, std::span<const char> adapted, Abstraction abstraction);

struct QEntry {
  double q = 0.0;
  std::size_t visits = 0;
  friend bool operator==(const QEntry&, const QEntry&) = default;
};

// Estimated chain cost per (state, chain key). Unseen pairs read as default_q
// until a cost has been observed, then as 1.1 times the largest observed cost
// (max + 0.1|max|, so negative costs move the same way).
class QTable {
 public:
  explicit QTable(double default_q = 0.0, Abstraction abstraction = Abstraction::Compact)
      : default_q_(default_q), abstraction_(abstraction) {}

  Abstraction abstraction() const { return abstraction_; }
  double value(const std::string& state, const std::string& chain) const;
  const QEntry* find(const std::string& state, const std::string& chain) const;
  double default_value() const;
  void observe_cost(double cost);
  // Pins the default to the largest stored estimate; used after training and loading.
  void freeze();

  void set(const RLState& st, const std::string& state_key, const std::string& chain, QEntry e);
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  const std::map<std::string, std::map<std::string, QEntry>>& entries() const { return entries_; }
  const RLState& state(const std::string& state_key) const { return states_.at(state_key); }

  nlohmann::json to_json(const Workflow& w) const;
  static QTable from_json(const nlohmann::json& doc, const Workflow& w);
  static QTable load(const std::string& path, const Workflow& w);
  void save(const std::string& path, const Workflow& w) const;

  friend bool operator==(const QTable& a, const QTable& b);

 private:
  double default_q_;
  Abstraction abstraction_;
  std::optional<double> max_seen_;
  std::map<std::string, std::map<std::string, QEntry>> entries_;
  std::map<std::string, RLState> states_;
};

struct RLConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::optional<double> epsilon_decay;  // per episode; derived from start/end/episodes when absent
  std::size_t episodes = 1000;
  double default_q = 0.0;
  Abstraction abstraction = Abstraction::Compact;
  double attack_rate = 0.3;  // injection rate while training

  void validate() const;  // ConfigError
  double epsilon(std::size_t episode) const;
};

RLConfig parse_rl_config(const nlohmann::json& doc);
RLConfig load_rl_config(const std::string& path);
nlohmann::json to_json(const RLConfig& c);

// Uniform with probability epsilon, else greedy argmin with ties to the
// earliest key. SelectionError on an empty candidate list.
std::size_t select_action(const QTable& q, const std::string& state, std::span<const std::string> keys,
                          double epsilon, Rng& rng);

// Next state for a Bellman update; nullopt is terminal.
struct NextState {
  std::string state;
  std::span<const std::string> keys;
};

// Q <- Q + alpha (cost + gamma min Q(next) - Q). Returns the new estimate.
double q_update(QTable& q, const RLState& st, const std::string& state_key, const std::string& chain, double cost,
                const std::optional<NextState>& next, const RLConfig& cfg);

// Greedy responder on a frozen table.
class QResponder : public Responder {
 public:
  QResponder(const QTable& q, const Workflow& w) : q_(q), w_(w), rng_(0) {}
  std::optional<std::size_t> choose(const Decision& d) override;

 private:
  const QTable& q_;
  const Workflow& w_;
  Rng rng_;
};

struct TrainLogRow {
  std::size_t episode = 0;
  double epsilon = 0.0;
  double mean_cost = 0.0;
  std::size_t decisions = 0;
};

struct TrainResult {
  QTable table;
  std::vector<TrainLogRow> log;
};

// Runs cfg.episodes instances with epsilon-greedy chain selection, rewards from
// chain cost under `weights`. Same (scenario, cfg, seed, weights) gives the same table.
TrainResult train(const Scenario& s, const RLConfig& cfg, std::uint64_t seed, const Weights& weights);

void write_train_log(const std::string& path, std::span<const TrainLogRow> log);

}  // namespace wfchain
