#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "wfchain/chain_engine.hpp"
#include "wfchain/rng.hpp"
#include "wfchain/scenario.hpp"
#include "wfchain/sdm.hpp"

namespace wfchain {

// RNG stream ids for derive_seed.
inline constexpr std::uint64_t kInjectionStream = 1;
inline constexpr std::uint64_t kAgentStream = 2;
inline constexpr std::uint64_t kBindingStream = 3;

struct Binding {
  std::size_t primary = 0;
  std::size_t backup = 0;
  bool degenerate = false;  // only one candidate, backup == primary
};

// One binding per task under the scenario's policy; backup is the next best.
// BindingError when a task has no candidate service.
std::vector<Binding> bind_services(const Scenario& s);
std::vector<BindingContext> binding_contexts(const Scenario& s, std::span<const Binding> bindings);

enum class ViolationOutcome { Pending, Adapted, BelowThreshold, Unhandled, NoResponse };
std::string_view to_string(ViolationOutcome o);

struct ViolationEvent {
  TaskIndex task = 0;
  std::string attack;
  Severity severity = Severity::Low;
  double score = 0.0;
  double detected_at = 0.0;
  ViolationOutcome outcome = ViolationOutcome::Pending;
  std::string chain;  // key of the applied chain
};

// Per task (in topological order): occurs with p = rate * sum(AFR), type drawn
// proportional to AFR, raw score uniform in [0,1]. Three draws per task.
std::vector<ViolationEvent> inject_attacks(const Scenario& s, std::span<const Binding> bindings, Rng& rng,
                                           double attack_rate);

enum class Strategy { None, Single, Chain, Oracle };
Strategy parse_strategy(std::string_view name);  // ConfigError
std::string_view to_string(Strategy s);

// What a responder sees when a violation has to be answered.
struct Decision {
  const ViolationEvent& event;
  Violation violation;
  std::span<const AdaptationChain> candidates;  // resolved, canonical order
  std::span<const std::string> keys;            // candidate keys, same order
  const ChainEvaluator& evaluator;
  const AdaptationHistory& history;
  std::span<const char> adapted;  // tasks touched by chains earlier in this instance
};

class Responder {
 public:
  virtual ~Responder() = default;
  // Candidates restricted to one step on vt.
  virtual bool single_step() const { return false; }
  // Index into d.candidates, or nothing to leave the violation unadapted.
  virtual std::optional<std::size_t> choose(const Decision& d) = 0;
  virtual void finish_instance() {}
};

// Argmin of chain cost over the decision's candidates.
class ArgminResponder : public Responder {
 public:
  explicit ArgminResponder(bool single) : single_(single) {}
  bool single_step() const override { return single_; }
  std::optional<std::size_t> choose(const Decision& d) override;

 private:
  bool single_;
};

enum class TaskStatus { Completed, Adapted, Reworked, Skipped };
std::string_view to_string(TaskStatus s);

struct TaskRecord {
  TaskIndex task = 0;
  std::string service;
  std::optional<ActionType> action;
  bool unintentional = false;
  double start = 0.0;
  double end = 0.0;
  double price = 0.0;
  double value = 0.0;
  double mitigation_score = 0.0;
  TaskStatus status = TaskStatus::Completed;
};

struct ExecutionTrace {
  std::size_t instance = 0;
  std::vector<TaskRecord> records;  // in execution order, re-runs appended
  std::vector<ViolationEvent> violations;
  AdaptationHistory history;
  std::size_t chains_applied = 0;
  CostBreakdown totals;
};

// Price, value and MS summed over records; time is the makespan.
CostBreakdown fold_totals(std::span<const TaskRecord> records, const Weights& w);

nlohmann::json to_json(const Workflow& w, const ExecutionTrace& t);

class Simulator;

// One running workflow instance. execute() drives it; tests and tools may
// drive it by hand.
class Instance {
 public:
  Instance(const Simulator& sim, std::size_t id, const Weights& weights);

  bool done(TaskIndex t) const { return finish_[t].has_value(); }
  double finish(TaskIndex t) const { return *finish_[t]; }
  std::span<const char> adapted() const { return adapted_; }
  const ExecutionTrace& trace() const { return trace_; }
  ExecutionTrace& trace() { return trace_; }

  // Starts no earlier than `earliest` and after every finished direct
  // predecessor. A planned chain action replaces the default run.
  void run_task(TaskIndex t, double earliest = 0.0, bool rework = false);
  // Re-runs from the chain's start points at time tau, plans steps on pending
  // tasks, commits to history. ApplicationError on a step outside the workflow.
  void apply_chain(const AdaptationChain& chain, const Violation& v, double tau);
  // Runs every task not yet run, in topological order, and folds the totals.
  ExecutionTrace complete();

 private:
  struct Planned {
    ActionType action;
    bool unintentional;
    double ms;
  };

  const Simulator& sim_;
  Weights weights_;
  ExecutionTrace trace_;
  std::vector<std::optional<double>> finish_;
  std::vector<std::optional<Planned>> planned_;
  std::vector<char> adapted_;
};

class Simulator {
 public:
  explicit Simulator(const Scenario& s);

  const Scenario& scenario() const { return s_; }
  const Workflow& workflow() const { return s_.workflow; }
  std::span<const Binding> bindings() const { return bindings_; }
  const SecurityDependencyMatrix& sdm() const { return sdm_; }
  const ActionTable& actions() const { return actions_; }
  ChainContext context() const { return {s_.workflow, sdm_, s_.catalog, actions_, s_.constraints}; }

  // Scripted violations when the scenario has any, else stochastic injection
  // from stream (master_seed, instance).
  std::vector<ViolationEvent> schedule(std::uint64_t master_seed, std::size_t instance, double attack_rate) const;

  // Generated and loop-expanded candidates, before constraint resolution.
  struct Candidates {
    std::vector<AdaptationChain> chains;
    std::vector<std::string> keys;
    bool truncated = false;
  };
  const Candidates& expanded(const Violation& v) const;

  // Resolved candidates for one decision; `scratch` holds them when
  // filtering was needed.
  std::pair<std::span<const AdaptationChain>, std::span<const std::string>> resolved(
      const Violation& v, const AdaptationHistory& history, bool single_step, Candidates& scratch) const;

  ExecutionTrace execute(std::size_t instance, std::vector<ViolationEvent> schedule, Responder* responder,
                         const Weights& weights) const;

 private:
  const Scenario& s_;
  std::vector<Binding> bindings_;
  SecurityDependencyMatrix sdm_;
  ActionTable actions_;
  mutable std::mutex cache_mu_;
  mutable std::map<std::tuple<TaskIndex, std::string, Severity>, std::unique_ptr<Candidates>> cache_;
};

}  // namespace wfchain
